// Command-line front end for the continual-learning experiment runner.
//
// Values come from an optional `key = value` config file; any flag given on
// the command line overrides the file. Results land in <out>/runs.csv and
// <out>/summary.json.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "gmed/config.hpp"
#include "gmed/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Online continual learning with gradient-based memory editing"};

    std::string config_path;
    app.add_option("--config", config_path, "key = value config file");

    // Every other flag is staged as a string override so that file values and
    // CLI values flow through the same parser.
    gmed::KeyValues overrides;
    auto stage = [&](const std::string& flag, const std::string& key, const std::string& help) {
        app.add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
            help);
    };
    auto stage_flag = [&](const std::string& flag, const std::string& key,
                          const std::string& value, const std::string& help) {
        app.add_flag_callback(
            flag, [&overrides, key, value]() { overrides.emplace_back(key, value); }, help);
    };

    stage("--dataset", "dataset", "split_mnist | permuted_mnist | rotated_mnist");
    stage("--variant", "variant",
          "comma list of finetune|er|er_gmed|mir|mir_gmed|er_aug|er_aug_gmed|agem|"
          "iid_online|iid_offline");
    stage("--mem-size", "mem_size", "replay memory capacity (comma list sweeps)");
    stage("--batch-size", "batch_size", "stream batch size");
    stage("--lr", "lr", "SGD learning rate");
    stage("--alpha", "alpha", "edit stride (default: per-dataset tuned value)");
    stage("--beta", "beta", "edit regularization strength");
    stage("--gamma", "gamma", "stride decay per replay count");
    stage("--edit-steps", "edit_steps", "inner edit gradient steps");
    stage("--edit-kind", "edit_kind", "gmed | random | adversarial | none");
    stage_flag("--no-writeback", "writeback", "false", "do not write edits back to memory");
    stage("--n-extra-edit", "n_extra_edit", "extra edited-but-not-replayed examples per step");
    stage_flag("--fuzzy", "fuzzy", "true", "blur task boundaries");
    stage("--fuzzy-start-frac", "fuzzy_start_frac", "where boundary mixing begins within a task");
    stage("--seeds", "seeds", "number of seeds");
    stage("--base-seed", "base_seed", "first seed value");
    stage_flag("--tune", "tune", "true", "grid-search alpha/beta on first-3-task validation");
    stage_flag("--cosine-trace", "cosine_trace", "true",
               "trace cosine to the hindsight-optimal edit direction");
    stage_flag("--pcr", "pcr", "true", "report the prediction change rate of edited memory");
    stage("--out", "out", "output directory");
    stage("--data-dir", "data_dir", "MNIST IDX directory (default: $GMED_DATA_DIR)");
    stage("--n-tasks", "n_tasks", "number of tasks (0 = benchmark default)");
    stage("--examples-per-task", "examples_per_task", "training examples per task");
    stage("--offline-epochs", "offline_epochs", "epochs for iid_offline");
    stage("--augment", "augment", "off | rot_shift");
    stage("--edit-trace", "edit_trace", "CSV path for per-edit trace rows");
    stage("--dump-memory", "dump_memory", "CSV path for the final memory contents");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = gmed::parse_config(config_path, overrides);
        const auto result = gmed::run_experiment(cfg);
        if (result.tuned_alpha >= 0.0)
            std::printf("tuned: alpha=%g beta=%g\n", result.tuned_alpha, result.tuned_beta);
        for (const auto& r : result.runs)
            std::printf("%s mem=%d seed=%llu final_acc=%.4f (%.1fs)\n", r.variant.c_str(),
                        r.mem_size, static_cast<unsigned long long>(r.seed),
                        r.metrics.final_accuracy, r.metrics.wall_time_s);
        std::printf("wrote %s/runs.csv and %s/summary.json\n", cfg.out_dir.c_str(),
                    cfg.out_dir.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
