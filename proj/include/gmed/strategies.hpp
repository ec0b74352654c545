#pragma once

#include <random>
#include <vector>

#include "gmed/memory.hpp"
#include "gmed/nn.hpp"

namespace gmed {

// Maximally-interfered retrieval: scores a uniform candidate draw by the
// per-example loss increase under the virtual update and returns the k
// highest-scoring slot indices (ties keep candidate order). No same-task
// filtering: the task-free adaptation scores every candidate.
std::vector<std::size_t> mir_retrieve(const ReplayMemory& mem, const MlpParams<float>& theta,
                                      const MlpParams<float>& theta_prime, std::size_t k,
                                      std::size_t n_candidates, std::mt19937_64& rng);

// Projects g onto the half-space {v : v . g_ref >= 0}. Returns g unchanged
// when the dot product is already non-negative or g_ref is zero.
std::vector<float> agem_project(const std::vector<float>& g, const std::vector<float>& g_ref);

enum class AugmentPolicy { Off, RotShift };

// Per-image random rotation in [-15, +15] degrees and translation in
// {-2..2}^2 pixels, bilinear with zero padding. Digits keep their chirality:
// no flips.
Mat<float> augment(const Mat<float>& batch, AugmentPolicy policy, std::mt19937_64& rng);

}  // namespace gmed
