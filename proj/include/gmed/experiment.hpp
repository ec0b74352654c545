#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmed/config.hpp"
#include "gmed/idx.hpp"
#include "gmed/metrics.hpp"
#include "gmed/stream.hpp"
#include "gmed/trainer.hpp"

namespace gmed {

struct RunRecord {
    std::string variant;
    std::string dataset;
    int mem_size = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0, beta = 0.0, gamma = 1.0;
    RunMetrics metrics;
};

struct ExperimentResult {
    std::vector<RunRecord> runs;
    double tuned_alpha = -1.0, tuned_beta = -1.0;  // set only when tuning ran
};

StreamKind dataset_kind(const std::string& name);

// "iid_online"/"iid_offline" run the finetune learner over a shuffled stream.
Variant variant_from_string(const std::string& name, RunMode& mode_out);

EditKind edit_kind_from_string(const std::string& name);

// One deterministic (variant, mem_size, seed) run over the full stream.
RunMetrics run_single(const ExperimentConfig& cfg, const Dataset& train, const Dataset& test,
                      const std::string& variant, int mem_size, std::uint64_t seed,
                      double alpha, double beta);

// Grid search on the first three tasks' validation sets; ties prefer the
// smaller alpha, then the smaller beta.
std::pair<double, double> tune_hyperparams(const ExperimentConfig& cfg, const Dataset& train,
                                           const Dataset& test,
                                           const std::vector<double>& grid_alpha,
                                           const std::vector<double>& grid_beta);

// Runs the full variant x mem_size x seed product and writes runs.csv plus
// summary.json into cfg.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& train,
                                const Dataset& test);

// Convenience overload that loads the IDX files from cfg.data_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_runs_csv(const std::string& path, const ExperimentResult& result);
void write_summary_json(const std::string& path, const ExperimentConfig& cfg,
                        const ExperimentResult& result);

// Default grids for --tune.
const std::vector<double>& default_alpha_grid();
const std::vector<double>& default_beta_grid();

}  // namespace gmed
