#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gmed/idx.hpp"
#include "gmed/memory.hpp"
#include "gmed/nn.hpp"
#include "gmed/stats.hpp"

namespace gmed {

struct RunMetrics {
    std::vector<double> per_task_accuracy;
    double final_accuracy = 0.0;
    std::vector<std::pair<long, double>> cosine_trace;  // (step, mean cosine)
    std::optional<double> prediction_change_rate;
    double wall_time_s = 0.0;
};

// Per-task accuracy plus the unweighted mean over tasks.
std::pair<std::vector<double>, double> final_accuracy(const MlpParams<float>& params,
                                                      const std::vector<Dataset>& test_sets);

template <typename T>
double cosine_similarity(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine length mismatch");
    const double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;  // zero vector -> 0 by convention
    return dot(a, b) / (na * nb);
}

// Fraction of memory slots whose argmax prediction differs between the
// edited and the original example. Requires original shadows.
double prediction_change_rate(const MlpParams<float>& params, const ReplayMemory& mem);

// Field-wise mean and unbiased sample std over runs.
struct AggregateMetrics {
    MeanStd final_accuracy;
    std::vector<MeanStd> per_task_accuracy;
    MeanStd wall_time_s;
};

AggregateMetrics aggregate_runs(const std::vector<RunMetrics>& runs);

}  // namespace gmed
