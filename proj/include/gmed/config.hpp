#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gmed {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat experiment configuration. File format is one `key = value` per line
// with `#` comments; CLI flags override file values key by key.
struct ExperimentConfig {
    std::string dataset = "split_mnist";
    std::vector<std::string> variants = {"er"};
    std::vector<int> mem_sizes = {500};
    int batch_size = 10;
    double lr = 0.05;
    double alpha = -1.0;  // <0 = per-dataset default
    double beta = -1.0;   // <0 = per-dataset default
    double gamma = 1.0;
    int edit_steps = 1;
    std::string edit_kind = "gmed";
    bool writeback = true;
    int n_extra_edit = 0;
    bool fuzzy = false;
    double fuzzy_start_frac = 0.5;
    int n_seeds = 10;
    std::uint64_t base_seed = 0;
    std::string out_dir = "out";
    std::string data_dir;  // empty = $GMED_DATA_DIR
    bool tune = false;
    bool cosine_trace = false;
    bool pcr = false;
    int n_tasks = 0;  // 0 = benchmark default
    int examples_per_task = 1000;
    int offline_epochs = 5;
    std::string augment_policy = "rot_shift";
    std::string edit_trace_path;
    std::string dump_memory_path;

    double resolved_alpha() const;
    double resolved_beta() const;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Loads `path` (may be empty for pure-CLI mode) and applies `overrides` on
// top. Unknown keys and unparsable values raise ConfigError.
ExperimentConfig parse_config(const std::string& path, const KeyValues& overrides);

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);

}  // namespace gmed
