#include "gmed/edit.hpp"

#include <cmath>
#include <stdexcept>

namespace gmed {

namespace {

// Input gradients of the batch-mean loss. Each row only depends on its own
// example, so the rows are the per-example gradients divided by the batch
// size; the edit stride is calibrated against this batch-mean convention.
Mat<float> mean_loss_input_grads(const MlpParams<float>& theta, const Mat<float>& x,
                                 const std::vector<int>& y) {
    auto [logits, cache] = forward(theta, x);
    return backward_input_grads(theta, cache, y);
}

}  // namespace

EditResult edit_batch(const Mat<float>& x, const std::vector<int>& y, const std::vector<int>& ks,
                      const MlpParams<float>& theta, const MlpParams<float>& theta_prime,
                      const EditConfig& cfg, std::mt19937_64& noise_rng) {
    EditResult res;
    res.x = x;
    res.first_direction = Mat<float>(x.rows, x.cols);
    if (cfg.kind == EditKind::None || x.rows == 0) return res;

    // gamma^k is fixed per time step; the direction is refreshed each inner step.
    std::vector<float> stride(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        stride[i] = float(std::pow(cfg.gamma, double(ks[i])) * cfg.alpha);

    for (int step = 0; step < cfg.steps; ++step) {
        Mat<float> dir(x.rows, x.cols);
        switch (cfg.kind) {
            case EditKind::Gmed: {
                // direction = grad_x loss(theta') - (1+beta) grad_x loss(theta),
                // the analytic gradient of d - beta*loss_before since theta'
                // does not depend on x.
                auto g_after = mean_loss_input_grads(theta_prime, res.x, y);
                auto g_before = mean_loss_input_grads(theta, res.x, y);
                const float w = float(1.0 + cfg.beta);
                for (std::size_t i = 0; i < dir.size(); ++i)
                    dir.data[i] = g_after.data[i] - w * g_before.data[i];
                break;
            }
            case EditKind::Random: {
                std::normal_distribution<double> gauss(0.0, 1.0);
                for (std::size_t i = 0; i < x.rows; ++i) {
                    double sq = 0;
                    for (std::size_t j = 0; j < x.cols; ++j) {
                        const double v = gauss(noise_rng);
                        dir(i, j) = float(v);
                        sq += v * v;
                    }
                    const float inv = sq > 0 ? float(1.0 / std::sqrt(sq)) : 0.0f;
                    for (std::size_t j = 0; j < x.cols; ++j) dir(i, j) *= inv;
                }
                break;
            }
            case EditKind::Adversarial: {
                auto g = mean_loss_input_grads(theta, res.x, y);
                for (std::size_t i = 0; i < dir.size(); ++i)
                    dir.data[i] = g.data[i] > 0 ? 1.0f : (g.data[i] < 0 ? -1.0f : 0.0f);
                break;
            }
            case EditKind::None: break;
        }
        if (step == 0) res.first_direction = dir;
        for (std::size_t i = 0; i < x.rows; ++i) {
            if (stride[i] == 0.0f) continue;  // keep x bitwise intact at alpha=0
            float* row = res.x.row(i);
            const float* d = dir.row(i);
            for (std::size_t j = 0; j < x.cols; ++j) row[j] += stride[i] * d[j];
        }
    }
    return res;
}

std::vector<float> edit_step(const std::vector<float>& x, int y, int k,
                             const MlpParams<float>& theta, const MlpParams<float>& theta_prime,
                             const EditConfig& cfg, std::mt19937_64& noise_rng) {
    Mat<float> xb(1, x.size());
    std::copy(x.begin(), x.end(), xb.row(0));
    auto res = edit_batch(xb, {y}, {k}, theta, theta_prime, cfg, noise_rng);
    return std::vector<float>(res.x.row(0), res.x.row(0) + x.size());
}

std::vector<float> optimal_edit_direction(const MlpParams<float>& theta,
                                          const MlpParams<float>& theta_prime,
                                          const std::vector<float>& x_m, int y_m,
                                          const Mat<float>& hist_x, const std::vector<int>& hist_y,
                                          float lr, double eps_rel) {
    if (hist_x.rows == 0) throw std::invalid_argument("empty history sample");

    Mat<float> xb(1, x_m.size());
    std::copy(x_m.begin(), x_m.end(), xb.row(0));
    std::vector<int> yb{y_m};

    // theta_{t+1}: the committed update on both the memory example and the
    // stream batch (theta_prime already carries the stream part).
    auto theta_next = virtual_update(theta_prime, xb, yb, lr);

    // h = grad_theta of the summed history loss at theta_{t+1}.
    auto [hl, hc] = forward(theta_next, hist_x);
    auto hg = backward(theta_next, hc, hist_y);
    std::vector<float> h = hg.param_grads.flatten();
    const double hist_n = double(hist_x.rows);
    for (auto& v : h) v = float(double(v) * hist_n);

    const double h_norm = l2_norm(h);
    if (h_norm == 0.0) return std::vector<float>(x_m.size(), 0.0f);
    const double theta_norm = l2_norm(theta.flatten());
    const double eps = eps_rel * theta_norm / h_norm;

    auto probe = [&](double sign) {
        MlpParams<float> p = theta;
        std::vector<float> flat = p.flatten();
        for (std::size_t i = 0; i < flat.size(); ++i)
            flat[i] = float(double(flat[i]) + sign * eps * double(h[i]));
        p.unflatten(flat);
        auto [l, c] = forward(p, xb);
        return backward_input_grads(p, c, yb);
    };
    auto gp = probe(+1.0);
    auto gm = probe(-1.0);

    std::vector<float> dir(x_m.size());
    const double scale = -double(lr) / (2.0 * eps);
    for (std::size_t i = 0; i < dir.size(); ++i)
        dir[i] = float(scale * (double(gp.data[i]) - double(gm.data[i])));
    return dir;
}

}  // namespace gmed
