#include "gmed/metrics.hpp"

#include <stdexcept>

namespace gmed {

std::pair<std::vector<double>, double> final_accuracy(const MlpParams<float>& params,
                                                      const std::vector<Dataset>& test_sets) {
    if (test_sets.empty()) throw std::invalid_argument("no test sets");
    std::vector<double> per_task;
    per_task.reserve(test_sets.size());
    double sum = 0;
    for (const auto& ts : test_sets) {
        if (ts.size() == 0) throw std::invalid_argument("missing test set");
        const double acc = evaluate_accuracy(params, ts.x, ts.y);
        per_task.push_back(acc);
        sum += acc;
    }
    return {per_task, sum / double(per_task.size())};
}

double prediction_change_rate(const MlpParams<float>& params, const ReplayMemory& mem) {
    if (!mem.keeps_originals()) throw std::invalid_argument("original shadows not enabled");
    if (mem.size() == 0) return 0.0;
    const std::size_t dim = mem.slot(0).x.size();
    Mat<float> edited(mem.size(), dim), original(mem.size(), dim);
    for (std::size_t i = 0; i < mem.size(); ++i) {
        const auto& s = mem.slot(i);
        std::copy(s.x.begin(), s.x.end(), edited.row(i));
        std::copy(s.original_x.begin(), s.original_x.end(), original.row(i));
    }
    auto argmax_all = [&](const Mat<float>& x) {
        std::vector<int> out(x.rows);
        auto [logits, cache] = forward(params, x);
        for (std::size_t i = 0; i < x.rows; ++i) {
            const float* row = logits.row(i);
            std::size_t best = 0;
            for (std::size_t j = 1; j < logits.cols; ++j)
                if (row[j] > row[best]) best = j;
            out[i] = int(best);
        }
        return out;
    };
    const auto pe = argmax_all(edited);
    const auto po = argmax_all(original);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < pe.size(); ++i)
        if (pe[i] != po[i]) ++changed;
    return double(changed) / double(pe.size());
}

AggregateMetrics aggregate_runs(const std::vector<RunMetrics>& runs) {
    if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
    AggregateMetrics agg;
    std::vector<double> finals, walls;
    for (const auto& r : runs) {
        finals.push_back(r.final_accuracy);
        walls.push_back(r.wall_time_s);
    }
    agg.final_accuracy = mean_std(finals);
    agg.wall_time_s = mean_std(walls);
    const std::size_t n_tasks = runs.front().per_task_accuracy.size();
    for (std::size_t t = 0; t < n_tasks; ++t) {
        std::vector<double> v;
        for (const auto& r : runs) v.push_back(r.per_task_accuracy.at(t));
        agg.per_task_accuracy.push_back(mean_std(v));
    }
    return agg;
}

}  // namespace gmed
