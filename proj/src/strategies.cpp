#include "gmed/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gmed/image.hpp"

namespace gmed {

std::vector<std::size_t> mir_retrieve(const ReplayMemory& mem, const MlpParams<float>& theta,
                                      const MlpParams<float>& theta_prime, std::size_t k,
                                      std::size_t n_candidates, std::mt19937_64& rng) {
    if (mem.size() == 0) throw std::invalid_argument("mir_retrieve on empty memory");
    const std::size_t c = std::min(n_candidates, mem.size());
    const std::size_t kk = std::min(k, c);
    auto candidates = mem.sample(c, rng);

    const std::size_t dim = mem.slot(candidates[0]).x.size();
    Mat<float> x(c, dim);
    std::vector<int> y(c);
    for (std::size_t i = 0; i < c; ++i) {
        const auto& s = mem.slot(candidates[i]);
        std::copy(s.x.begin(), s.x.end(), x.row(i));
        y[i] = s.y;
    }
    auto [logits_before, cache_b] = forward(theta, x);
    auto [logits_after, cache_a] = forward(theta_prime, x);
    const auto loss_before = per_example_loss(logits_before, y);
    const auto loss_after = per_example_loss(logits_after, y);

    std::vector<std::size_t> order(c);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (loss_after[a] - loss_before[a]) > (loss_after[b] - loss_before[b]);
    });
    std::vector<std::size_t> out(kk);
    for (std::size_t i = 0; i < kk; ++i) out[i] = candidates[order[i]];
    return out;
}

std::vector<float> agem_project(const std::vector<float>& g, const std::vector<float>& g_ref) {
    if (g.size() != g_ref.size()) throw std::invalid_argument("gradient length mismatch");
    const double ref_sq = dot(g_ref, g_ref);
    if (ref_sq == 0.0) return g;
    const double d = dot(g, g_ref);
    if (d >= 0.0) return g;
    const double scale = d / ref_sq;
    std::vector<float> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        out[i] = g[i] - float(scale * double(g_ref[i]));
    return out;
}

Mat<float> augment(const Mat<float>& batch, AugmentPolicy policy, std::mt19937_64& rng) {
    if (policy == AugmentPolicy::Off) return batch;
    const std::size_t side = 28;
    if (batch.cols != side * side) throw std::invalid_argument("augment expects 28x28 images");
    Mat<float> out(batch.rows, batch.cols);
    std::uniform_real_distribution<double> angle(-15.0, 15.0);
    std::uniform_int_distribution<int> shift(-2, 2);
    for (std::size_t i = 0; i < batch.rows; ++i) {
        const double a = angle(rng);
        const int dx = shift(rng), dy = shift(rng);
        rotate_shift_bilinear(batch.row(i), out.row(i), side, a, dx, dy);
    }
    return out;
}

}  // namespace gmed
