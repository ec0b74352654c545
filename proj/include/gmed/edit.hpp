#pragma once

#include <random>
#include <vector>

#include "gmed/nn.hpp"

namespace gmed {

enum class EditKind { Gmed, Random, Adversarial, None };

struct EditConfig {
    double alpha = 0.0;   // edit stride
    double beta = 0.0;    // regularization strength
    double gamma = 1.0;   // stride decay per replay count
    int steps = 1;        // inner gradient steps per time step
    EditKind kind = EditKind::Gmed;
    bool writeback = true;
    int n_extra_edit = 0;
};

// One-step SGD on the stream batch. The result is the throwaway model used
// to estimate interference; the caller keeps the original parameters.
template <typename T>
MlpParams<T> virtual_update(const MlpParams<T>& theta, const Mat<T>& x_d,
                            const std::vector<int>& y_d, T lr) {
    auto [logits, cache] = forward(theta, x_d);
    auto grads = backward(theta, cache, y_d, /*need_input_grads=*/false);
    return sgd_step(theta, grads.param_grads, lr);
}

// Per-example loss increase between the pre- and post-update models.
template <typename T>
std::vector<double> interference(const MlpParams<T>& theta, const MlpParams<T>& theta_prime,
                                 const Mat<T>& x_m, const std::vector<int>& y_m) {
    auto [lb, cb] = forward(theta, x_m);
    auto [la, ca] = forward(theta_prime, x_m);
    auto before = per_example_loss(lb, y_m);
    auto after = per_example_loss(la, y_m);
    for (std::size_t i = 0; i < before.size(); ++i) after[i] -= before[i];
    return after;
}

struct EditResult {
    Mat<float> x;                  // edited batch
    Mat<float> first_direction;    // per-example direction of the first inner step
};

// Applies the configured edit to a batch of memory examples. ks carries each
// example's replay count; the gamma^k factor is fixed for the whole time
// step while the direction is recomputed at every inner step.
EditResult edit_batch(const Mat<float>& x, const std::vector<int>& y, const std::vector<int>& ks,
                      const MlpParams<float>& theta, const MlpParams<float>& theta_prime,
                      const EditConfig& cfg, std::mt19937_64& noise_rng);

// Single-example convenience wrapper.
std::vector<float> edit_step(const std::vector<float>& x, int y, int k,
                             const MlpParams<float>& theta, const MlpParams<float>& theta_prime,
                             const EditConfig& cfg, std::mt19937_64& noise_rng);

// Hindsight oracle: gradient of the total one-step loss increase over a
// sample of previously visited examples w.r.t. the memory example, computed
// with a parameter-directional central difference. theta_prime is the model
// after the stream-batch update; eps_rel scales the probe step relative to
// ||theta|| / ||h||.
std::vector<float> optimal_edit_direction(const MlpParams<float>& theta,
                                          const MlpParams<float>& theta_prime,
                                          const std::vector<float>& x_m, int y_m,
                                          const Mat<float>& hist_x, const std::vector<int>& hist_y,
                                          float lr, double eps_rel = 1e-3);

}  // namespace gmed
