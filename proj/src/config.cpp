#include "gmed/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gmed {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for '" + key + "': " + value);
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for '" + key + "': " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("bad boolean value for '" + key + "': " + value);
}

}  // namespace

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset") {
        cfg.dataset = value;
    } else if (key == "variant") {
        cfg.variants = split_list(value);
        if (cfg.variants.empty()) throw ConfigError("empty variant list");
    } else if (key == "mem_size") {
        cfg.mem_sizes.clear();
        for (const auto& m : split_list(value))
            cfg.mem_sizes.push_back(int(parse_int(key, m)));
        if (cfg.mem_sizes.empty()) throw ConfigError("empty mem_size list");
    } else if (key == "batch_size") {
        cfg.batch_size = int(parse_int(key, value));
    } else if (key == "lr") {
        cfg.lr = parse_double(key, value);
    } else if (key == "alpha") {
        cfg.alpha = parse_double(key, value);
    } else if (key == "beta") {
        cfg.beta = parse_double(key, value);
    } else if (key == "gamma") {
        cfg.gamma = parse_double(key, value);
    } else if (key == "edit_steps") {
        cfg.edit_steps = int(parse_int(key, value));
    } else if (key == "edit_kind") {
        if (value != "gmed" && value != "random" && value != "adversarial" && value != "none")
            throw ConfigError("unknown edit_kind: " + value);
        cfg.edit_kind = value;
    } else if (key == "writeback") {
        cfg.writeback = parse_bool(key, value);
    } else if (key == "n_extra_edit") {
        cfg.n_extra_edit = int(parse_int(key, value));
    } else if (key == "fuzzy") {
        cfg.fuzzy = parse_bool(key, value);
    } else if (key == "fuzzy_start_frac") {
        cfg.fuzzy_start_frac = parse_double(key, value);
    } else if (key == "seeds") {
        cfg.n_seeds = int(parse_int(key, value));
    } else if (key == "base_seed") {
        cfg.base_seed = std::uint64_t(parse_int(key, value));
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "data_dir") {
        cfg.data_dir = value;
    } else if (key == "tune") {
        cfg.tune = parse_bool(key, value);
    } else if (key == "cosine_trace") {
        cfg.cosine_trace = parse_bool(key, value);
    } else if (key == "pcr") {
        cfg.pcr = parse_bool(key, value);
    } else if (key == "n_tasks") {
        cfg.n_tasks = int(parse_int(key, value));
    } else if (key == "examples_per_task") {
        cfg.examples_per_task = int(parse_int(key, value));
    } else if (key == "offline_epochs") {
        cfg.offline_epochs = int(parse_int(key, value));
    } else if (key == "augment") {
        if (value != "off" && value != "rot_shift")
            throw ConfigError("unknown augment policy: " + value);
        cfg.augment_policy = value;
    } else if (key == "edit_trace") {
        cfg.edit_trace_path = value;
    } else if (key == "dump_memory") {
        cfg.dump_memory_path = value;
    } else {
        throw ConfigError("unknown config key: '" + key + "'");
    }
}

ExperimentConfig parse_config(const std::string& path, const KeyValues& overrides) {
    ExperimentConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": expected key = value, got: " + line);
            apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }
    for (const auto& [k, v] : overrides) apply_key(cfg, k, v);
    if (cfg.data_dir.empty()) {
        if (const char* env = std::getenv("GMED_DATA_DIR")) cfg.data_dir = env;
    }
    return cfg;
}

double ExperimentConfig::resolved_alpha() const {
    if (alpha >= 0.0) return alpha;
    if (dataset == "split_mnist") return 5.0;
    if (dataset == "permuted_mnist") return 0.05;
    if (dataset == "rotated_mnist") return 1.0;
    return 1.0;
}

double ExperimentConfig::resolved_beta() const {
    if (beta >= 0.0) return beta;
    if (dataset == "split_mnist") return 0.01;
    if (dataset == "permuted_mnist") return 0.001;
    if (dataset == "rotated_mnist") return 0.01;
    return 0.01;
}

}  // namespace gmed
