#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gmed/idx.hpp"
#include "gmed/nn.hpp"

namespace testsup {

// Separable synthetic "MNIST-shaped" blobs: class c lights up a fixed block
// of pixels. Keeps stream/trainer tests independent of the real data files.
inline gmed::Dataset synthetic_dataset(std::size_t per_class, int n_classes = 10,
                                       std::uint64_t seed = 42) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> noise(0.0f, 0.1f);
    std::uniform_real_distribution<float> signal(0.6f, 1.0f);
    gmed::Dataset ds;
    const std::size_t n = per_class * std::size_t(n_classes);
    ds.x = gmed::Mat<float>(n, 784);
    ds.y.resize(n);
    ds.source_index.resize(n);
    // interleave classes so label-filtered subsets stay shuffled
    for (std::size_t i = 0; i < n; ++i) {
        const int c = int(i % std::size_t(n_classes));
        float* row = ds.x.row(i);
        for (std::size_t j = 0; j < 784; ++j) row[j] = noise(rng);
        const std::size_t lo = std::size_t(c) * 70;
        for (std::size_t j = lo; j < lo + 50; ++j) row[j] = signal(rng);
        ds.y[i] = c;
        ds.source_index[i] = int(i);
    }
    return ds;
}

inline void write_be32(std::ofstream& f, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    f.write(reinterpret_cast<char*>(buf), 4);
}

// Writes a matching IDX image/label file pair with the given dimensions.
inline void write_idx_pair(const std::string& img_path, const std::string& lbl_path,
                           const std::vector<std::vector<unsigned char>>& images,
                           const std::vector<unsigned char>& labels, std::uint32_t rows,
                           std::uint32_t cols, std::uint32_t img_magic = 0x00000803,
                           std::uint32_t lbl_magic = 0x00000801,
                           std::uint32_t label_count_override = 0xffffffff) {
    std::ofstream img(img_path, std::ios::binary);
    write_be32(img, img_magic);
    write_be32(img, std::uint32_t(images.size()));
    write_be32(img, rows);
    write_be32(img, cols);
    for (const auto& im : images)
        img.write(reinterpret_cast<const char*>(im.data()), std::streamsize(im.size()));

    std::ofstream lbl(lbl_path, std::ios::binary);
    write_be32(lbl, lbl_magic);
    write_be32(lbl, label_count_override == 0xffffffff ? std::uint32_t(labels.size())
                                                       : label_count_override);
    lbl.write(reinterpret_cast<const char*>(labels.data()), std::streamsize(labels.size()));
}

template <typename T>
gmed::MlpParams<T> random_mlp(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    return gmed::init_mlp<T>(sizes, seed);
}

// Smallest pre-activation magnitude over all hidden layers; finite-difference
// trials near a ReLU kink are skipped by checking this margin.
template <typename T>
double relu_margin(const gmed::MlpParams<T>& p, const gmed::Mat<T>& x) {
    auto [logits, cache] = gmed::forward(p, x);
    double m = 1e300;
    for (std::size_t l = 0; l + 1 < p.layers.size() + 1 && l + 1 < cache.pre.size() + 1; ++l) {
        if (l + 1 == cache.pre.size()) break;  // last pre-activation is the logits
        for (T v : cache.pre[l].data) m = std::min(m, std::abs(double(v)));
    }
    return m;
}

inline std::string temp_path(const std::string& name) {
    return std::string("/tmp/gmed_test_") + name;
}

}  // namespace testsup
