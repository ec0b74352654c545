#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gmed/matrix.hpp"
#include "gmed/rng.hpp"

namespace gmed {

// Feed-forward classifier with ReLU hidden layers and identity output.
// Templated on the scalar type: float is the training path, double exists
// for the finite-difference gradient checks.
template <typename T>
struct MlpParams {
    struct Layer {
        Mat<T> w;           // (out x in)
        std::vector<T> b;   // (out)
    };
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.front().w.cols; }
    std::size_t output_dim() const { return layers.back().w.rows; }

    std::vector<T> flatten() const {
        std::vector<T> out;
        for (const auto& l : layers) {
            out.insert(out.end(), l.w.data.begin(), l.w.data.end());
            out.insert(out.end(), l.b.begin(), l.b.end());
        }
        return out;
    }

    void unflatten(const std::vector<T>& flat) {
        std::size_t pos = 0;
        for (auto& l : layers) {
            std::copy_n(flat.begin() + pos, l.w.size(), l.w.data.begin());
            pos += l.w.size();
            std::copy_n(flat.begin() + pos, l.b.size(), l.b.begin());
            pos += l.b.size();
        }
        if (pos != flat.size()) throw std::invalid_argument("flat size mismatch");
    }
};

template <typename T>
struct ForwardCache {
    // pre[l] holds layer l pre-activations, post[l] the activations fed to
    // layer l+1. post[0] is the input batch itself.
    std::vector<Mat<T>> pre;
    std::vector<Mat<T>> post;
    const MlpParams<T>* params = nullptr;  // identity check against stale reuse
};

template <typename T>
struct GradBundle {
    MlpParams<T> param_grads;
    Mat<T> input_grads;  // (batch x input_dim), gradient of the mean batch loss
};

template <typename T>
MlpParams<T> init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("need at least 2 layer sizes");
    for (auto s : layer_sizes)
        if (s == 0) throw std::invalid_argument("layer size must be positive");

    auto rng = make_rng(seed, RngStream::Init);
    MlpParams<T> p;
    p.layers.resize(layer_sizes.size() - 1);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const std::size_t in = layer_sizes[l], out = layer_sizes[l + 1];
        auto& layer = p.layers[l];
        layer.w = Mat<T>(out, in);
        layer.b.assign(out, T{0});
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(in)));
        for (auto& v : layer.w.data) v = static_cast<T>(dist(rng));
    }
    return p;
}

template <typename T>
std::pair<Mat<T>, ForwardCache<T>> forward(const MlpParams<T>& params, const Mat<T>& x) {
    if (x.cols != params.input_dim()) throw std::invalid_argument("input dim mismatch");
    ForwardCache<T> cache;
    cache.params = &params;
    cache.post.push_back(x);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        Mat<T> z;
        matmul_abt(cache.post.back(), layer.w, z);
        for (std::size_t i = 0; i < z.rows; ++i)
            for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += layer.b[j];
        cache.pre.push_back(std::move(z));
        if (l + 1 < params.layers.size()) {
            Mat<T> a = cache.pre.back();
            for (auto& v : a.data) v = std::max(v, T{0});
            cache.post.push_back(std::move(a));
        }
    }
    return {cache.pre.back(), std::move(cache)};
}

// Mean softmax cross-entropy with max-subtraction; accumulates in double.
template <typename T>
double cross_entropy(const Mat<T>& logits, const std::vector<int>& labels) {
    if (logits.rows != labels.size()) throw std::invalid_argument("batch size mismatch");
    double total = 0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const int y = labels[i];
        if (y < 0 || std::size_t(y) >= logits.cols) throw std::out_of_range("label out of range");
        const T* row = logits.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, double(row[j]));
        double lse = 0;
        for (std::size_t j = 0; j < logits.cols; ++j) lse += std::exp(double(row[j]) - mx);
        total += std::log(lse) + mx - double(row[y]);
    }
    return total / double(logits.rows);
}

// Per-example -log softmax, used by the interference estimate and MIR scoring.
template <typename T>
std::vector<double> per_example_loss(const Mat<T>& logits, const std::vector<int>& labels) {
    if (logits.rows != labels.size()) throw std::invalid_argument("batch size mismatch");
    std::vector<double> out(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const int y = labels[i];
        if (y < 0 || std::size_t(y) >= logits.cols) throw std::out_of_range("label out of range");
        const T* row = logits.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, double(row[j]));
        double lse = 0;
        for (std::size_t j = 0; j < logits.cols; ++j) lse += std::exp(double(row[j]) - mx);
        out[i] = std::log(lse) + mx - double(row[y]);
    }
    return out;
}

// need_input_grads=false skips the layer-0 delta propagation and leaves
// input_grads empty; callers that only commit parameter updates use it.
template <typename T>
GradBundle<T> backward(const MlpParams<T>& params, const ForwardCache<T>& cache,
                       const std::vector<int>& labels, bool need_input_grads = true) {
    if (cache.params != &params) throw std::invalid_argument("stale forward cache");
    const std::size_t n_layers = params.layers.size();
    const Mat<T>& logits = cache.pre.back();
    const std::size_t batch = logits.rows;
    if (batch != labels.size()) throw std::invalid_argument("batch size mismatch");

    GradBundle<T> g;
    g.param_grads.layers.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        g.param_grads.layers[l].w = Mat<T>(params.layers[l].w.rows, params.layers[l].w.cols);
        g.param_grads.layers[l].b.assign(params.layers[l].b.size(), T{0});
    }

    // d(mean loss)/d(logits) = (softmax - onehot) / batch
    Mat<T> delta(batch, logits.cols);
    for (std::size_t i = 0; i < batch; ++i) {
        const T* row = logits.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, double(row[j]));
        double lse = 0;
        for (std::size_t j = 0; j < logits.cols; ++j) lse += std::exp(double(row[j]) - mx);
        for (std::size_t j = 0; j < logits.cols; ++j)
            delta(i, j) = static_cast<T>(std::exp(double(row[j]) - mx) / lse / double(batch));
        delta(i, std::size_t(labels[i])) -= static_cast<T>(1.0 / double(batch));
    }

    for (std::size_t l = n_layers; l-- > 0;) {
        auto& pg = g.param_grads.layers[l];
        matmul_atb_acc(delta, cache.post[l], pg.w);
        for (std::size_t i = 0; i < batch; ++i)
            for (std::size_t j = 0; j < pg.b.size(); ++j) pg.b[j] += delta(i, j);
        if (l == 0 && !need_input_grads) return g;
        Mat<T> prev;
        matmul_ab(delta, params.layers[l].w, prev);
        if (l > 0) {
            const Mat<T>& z = cache.pre[l - 1];
            for (std::size_t i = 0; i < prev.size(); ++i)
                if (z.data[i] <= T{0}) prev.data[i] = T{0};
        }
        delta = std::move(prev);
    }
    g.input_grads = std::move(delta);
    return g;
}

// Gradient of the mean batch loss w.r.t. the inputs only. Identical to
// backward().input_grads but skips the parameter-gradient accumulation;
// the edit path calls this every step and never reads parameter gradients.
template <typename T>
Mat<T> backward_input_grads(const MlpParams<T>& params, const ForwardCache<T>& cache,
                            const std::vector<int>& labels) {
    if (cache.params != &params) throw std::invalid_argument("stale forward cache");
    const std::size_t n_layers = params.layers.size();
    const Mat<T>& logits = cache.pre.back();
    const std::size_t batch = logits.rows;
    if (batch != labels.size()) throw std::invalid_argument("batch size mismatch");

    Mat<T> delta(batch, logits.cols);
    for (std::size_t i = 0; i < batch; ++i) {
        const T* row = logits.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, double(row[j]));
        double lse = 0;
        for (std::size_t j = 0; j < logits.cols; ++j) lse += std::exp(double(row[j]) - mx);
        for (std::size_t j = 0; j < logits.cols; ++j)
            delta(i, j) = static_cast<T>(std::exp(double(row[j]) - mx) / lse / double(batch));
        delta(i, std::size_t(labels[i])) -= static_cast<T>(1.0 / double(batch));
    }
    for (std::size_t l = n_layers; l-- > 0;) {
        Mat<T> prev;
        matmul_ab(delta, params.layers[l].w, prev);
        if (l > 0) {
            const Mat<T>& z = cache.pre[l - 1];
            for (std::size_t i = 0; i < prev.size(); ++i)
                if (z.data[i] <= T{0}) prev.data[i] = T{0};
        }
        delta = std::move(prev);
    }
    return delta;
}

// Returns updated parameters by value; the input stays untouched so the
// pre- and post-update models can coexist.
template <typename T>
MlpParams<T> sgd_step(const MlpParams<T>& params, const MlpParams<T>& grads, T lr) {
    if (!std::isfinite(double(lr))) throw std::invalid_argument("non-finite learning rate");
    MlpParams<T> out = params;
    for (std::size_t l = 0; l < out.layers.size(); ++l) {
        auto& layer = out.layers[l];
        const auto& gl = grads.layers[l];
        if (!layer.w.same_shape(gl.w) || layer.b.size() != gl.b.size())
            throw std::invalid_argument("gradient shape mismatch");
        for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w.data[i] -= lr * gl.w.data[i];
        for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= lr * gl.b[i];
    }
    return out;
}

// Argmax match rate; ties break toward the smallest class index.
template <typename T>
double evaluate_accuracy(const MlpParams<T>& params, const Mat<T>& x,
                         const std::vector<int>& labels) {
    if (x.rows == 0) throw std::invalid_argument("empty evaluation set");
    const std::size_t chunk = 256;
    std::int64_t correct = 0;
    for (std::size_t start = 0; start < x.rows; start += chunk) {
        const std::size_t n = std::min(chunk, x.rows - start);
        Mat<T> xb(n, x.cols);
        std::copy_n(x.row(start), n * x.cols, xb.data.begin());
        auto [logits, cache] = forward(params, xb);
        for (std::size_t i = 0; i < n; ++i) {
            const T* row = logits.row(i);
            std::size_t best = 0;
            for (std::size_t j = 1; j < logits.cols; ++j)
                if (row[j] > row[best]) best = j;
            if (int(best) == labels[start + i]) ++correct;
        }
    }
    return double(correct) / double(x.rows);
}

}  // namespace gmed
