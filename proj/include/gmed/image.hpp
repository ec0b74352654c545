#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace gmed {

// 28x28 image helpers shared by the rotated-task builder and replay
// augmentation. Inverse-mapped bilinear interpolation about the image
// center, background 0.

inline void rotate_shift_bilinear(const float* src, float* dst, std::size_t side,
                                  double angle_deg, int dx, int dy) {
    const double rad = angle_deg * M_PI / 180.0;
    const double ca = std::cos(rad), sa = std::sin(rad);
    const double cx = (double(side) - 1.0) / 2.0;
    const double cy = (double(side) - 1.0) / 2.0;
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            // undo the translation, then rotate backwards into source space
            const double xo = double(c) - dx - cx;
            const double yo = double(r) - dy - cy;
            const double xs = ca * xo + sa * yo + cx;
            const double ys = -sa * xo + ca * yo + cy;
            float v = 0.0f;
            const int x0 = int(std::floor(xs)), y0 = int(std::floor(ys));
            const double fx = xs - x0, fy = ys - y0;
            double acc = 0;
            for (int oy = 0; oy <= 1; ++oy) {
                for (int ox = 0; ox <= 1; ++ox) {
                    const int xi = x0 + ox, yi = y0 + oy;
                    if (xi < 0 || yi < 0 || xi >= int(side) || yi >= int(side)) continue;
                    const double w = (ox ? fx : 1.0 - fx) * (oy ? fy : 1.0 - fy);
                    acc += w * double(src[std::size_t(yi) * side + std::size_t(xi)]);
                }
            }
            v = float(acc);
            dst[r * side + c] = v;
        }
    }
}

inline void rotate_bilinear(const float* src, float* dst, std::size_t side, double angle_deg) {
    rotate_shift_bilinear(src, dst, side, angle_deg, 0, 0);
}

}  // namespace gmed
