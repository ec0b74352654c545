#include "gmed/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gmed {

namespace {

using json = nlohmann::json;

StreamConfig stream_config_for(const ExperimentConfig& cfg, RunMode mode, std::uint64_t seed) {
    StreamConfig sc;
    sc.kind = dataset_kind(cfg.dataset);
    sc.mode = mode;
    sc.n_tasks = cfg.n_tasks;
    sc.examples_per_task = cfg.examples_per_task;
    sc.batch_size = cfg.batch_size;
    sc.fuzzy = cfg.fuzzy;
    sc.fuzzy_start_frac = cfg.fuzzy_start_frac;
    sc.seed = seed;
    sc.offline_epochs = cfg.offline_epochs;
    return sc;
}

EditConfig edit_config_for(const ExperimentConfig& cfg, double alpha, double beta) {
    EditConfig ec;
    ec.alpha = alpha;
    ec.beta = beta;
    ec.gamma = cfg.gamma;
    ec.steps = cfg.edit_steps;
    ec.kind = edit_kind_from_string(cfg.edit_kind);
    ec.writeback = cfg.writeback;
    ec.n_extra_edit = cfg.n_extra_edit;
    return ec;
}

bool multi_run(const ExperimentConfig& cfg) {
    return cfg.n_seeds > 1 || cfg.variants.size() > 1 || cfg.mem_sizes.size() > 1;
}

std::string run_suffixed(const std::string& path, const ExperimentConfig& cfg,
                         const std::string& variant, int mem_size, std::uint64_t seed) {
    if (!multi_run(cfg)) return path;
    std::filesystem::path p(path);
    const std::string tag =
        "_" + variant + "_m" + std::to_string(mem_size) + "_s" + std::to_string(seed);
    return (p.parent_path() / (p.stem().string() + tag + p.extension().string())).string();
}

}  // namespace

StreamKind dataset_kind(const std::string& name) {
    if (name == "split_mnist") return StreamKind::Split;
    if (name == "permuted_mnist") return StreamKind::Permuted;
    if (name == "rotated_mnist") return StreamKind::Rotated;
    throw ConfigError("unknown dataset: " + name);
}

Variant variant_from_string(const std::string& name, RunMode& mode_out) {
    mode_out = RunMode::Sequential;
    if (name == "finetune") return Variant::Finetune;
    if (name == "er") return Variant::Er;
    if (name == "er_gmed") return Variant::ErGmed;
    if (name == "mir") return Variant::Mir;
    if (name == "mir_gmed") return Variant::MirGmed;
    if (name == "er_aug") return Variant::ErAug;
    if (name == "er_aug_gmed") return Variant::ErAugGmed;
    if (name == "agem") return Variant::Agem;
    if (name == "iid_online") {
        mode_out = RunMode::IidOnline;
        return Variant::Finetune;
    }
    if (name == "iid_offline") {
        mode_out = RunMode::IidOffline;
        return Variant::Finetune;
    }
    throw ConfigError("unknown variant: " + name);
}

EditKind edit_kind_from_string(const std::string& name) {
    if (name == "gmed") return EditKind::Gmed;
    if (name == "random") return EditKind::Random;
    if (name == "adversarial") return EditKind::Adversarial;
    if (name == "none") return EditKind::None;
    throw ConfigError("unknown edit kind: " + name);
}

RunMetrics run_single(const ExperimentConfig& cfg, const Dataset& train, const Dataset& test,
                      const std::string& variant_name, int mem_size, std::uint64_t seed,
                      double alpha, double beta) {
    RunMode mode;
    const Variant variant = variant_from_string(variant_name, mode);
    const TaskStream stream = build_stream(train, test, stream_config_for(cfg, mode, seed));

    auto params = init_mlp<float>({train.x.cols, 400, 400, 10}, seed);
    auto state = make_trainer(variant, std::move(params), std::size_t(mem_size), float(cfg.lr),
                              edit_config_for(cfg, alpha, beta), seed, cfg.pcr);

    CosineTracer tracer(512, 50, seed);
    if (cfg.cosine_trace && variant_uses_gmed(variant)) state.tracer = &tracer;

    std::ofstream edit_trace;
    if (!cfg.edit_trace_path.empty() && variant_uses_gmed(variant)) {
        edit_trace.open(run_suffixed(cfg.edit_trace_path, cfg, variant_name, mem_size, seed));
        edit_trace << "t,slot,replay_count,delta_l2,d_before,d_after\n";
        state.edit_trace = &edit_trace;
    }

    StreamCursor cursor;
    const auto t0 = std::chrono::steady_clock::now();
    while (auto batch = next_batch(stream, cursor)) train_step(state, *batch);
    const auto t1 = std::chrono::steady_clock::now();

    RunMetrics m;
    m.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    std::tie(m.per_task_accuracy, m.final_accuracy) =
        final_accuracy(state.params, stream.test_sets);
    if (state.tracer) m.cosine_trace = tracer.trace();
    if (cfg.pcr) m.prediction_change_rate = prediction_change_rate(state.params, state.mem);
    if (!cfg.dump_memory_path.empty()) {
        std::ofstream dump(run_suffixed(cfg.dump_memory_path, cfg, variant_name, mem_size, seed));
        state.mem.dump_csv(dump);
    }
    return m;
}

const std::vector<double>& default_alpha_grid() {
    static const std::vector<double> g = {0.01, 0.03, 0.05, 0.07, 0.1, 0.5, 1.0, 5.0, 10.0};
    return g;
}

const std::vector<double>& default_beta_grid() {
    static const std::vector<double> g = {0.0, 1e-3, 1e-2, 1e-1, 1.0};
    return g;
}

std::pair<double, double> tune_hyperparams(const ExperimentConfig& cfg, const Dataset& train,
                                           const Dataset& test,
                                           const std::vector<double>& grid_alpha,
                                           const std::vector<double>& grid_beta) {
    if (grid_alpha.empty() || grid_beta.empty()) throw ConfigError("empty hyperparameter grid");

    // Tune the first edit-based variant requested, defaulting to er_gmed.
    std::string variant = "er_gmed";
    for (const auto& v : cfg.variants) {
        RunMode mode;
        if (variant_uses_gmed(variant_from_string(v, mode))) {
            variant = v;
            break;
        }
    }
    RunMode mode;
    const Variant vkind = variant_from_string(variant, mode);

    // Truncated stream: the first three tasks, scored on their validation sets.
    StreamConfig sc = stream_config_for(cfg, mode, cfg.base_seed);
    TaskStream stream = build_stream(train, test, sc);
    if (stream.n_tasks > 3) {
        std::size_t keep = 0;
        while (keep < stream.x.rows && stream.latent_task[keep] < 3) ++keep;
        Mat<float> x(keep, stream.x.cols);
        std::copy_n(stream.x.data.data(), keep * stream.x.cols, x.data.begin());
        stream.x = std::move(x);
        stream.y.resize(keep);
        stream.latent_task.resize(keep);
        stream.n_tasks = 3;
    }
    if (stream.val_sets.empty()) throw std::logic_error("stream has no validation sets");

    double best_alpha = grid_alpha.front(), best_beta = grid_beta.front(), best_acc = -1.0;
    for (const double a : grid_alpha) {
        for (const double b : grid_beta) {
            auto params = init_mlp<float>({train.x.cols, 400, 400, 10}, cfg.base_seed);
            auto state =
                make_trainer(vkind, std::move(params), std::size_t(cfg.mem_sizes.front()),
                             float(cfg.lr), edit_config_for(cfg, a, b), cfg.base_seed);
            StreamCursor cursor;
            while (auto batch = next_batch(stream, cursor)) train_step(state, *batch);
            auto [per_task, mean_acc] = final_accuracy(state.params, stream.val_sets);
            if (mean_acc > best_acc) {  // grid order already prefers smaller alpha, beta
                best_acc = mean_acc;
                best_alpha = a;
                best_beta = b;
            }
        }
    }
    return {best_alpha, best_beta};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& train,
                                const Dataset& test) {
    ExperimentResult result;
    double alpha = cfg.resolved_alpha();
    double beta = cfg.resolved_beta();
    if (cfg.tune) {
        std::tie(alpha, beta) =
            tune_hyperparams(cfg, train, test, default_alpha_grid(), default_beta_grid());
        result.tuned_alpha = alpha;
        result.tuned_beta = beta;
    }

    for (const auto& variant : cfg.variants) {
        for (const int mem : cfg.mem_sizes) {
            for (int i = 0; i < cfg.n_seeds; ++i) {
                const std::uint64_t seed = cfg.base_seed + std::uint64_t(i);
                RunRecord rec{.variant = variant,
                              .dataset = cfg.dataset,
                              .mem_size = mem,
                              .seed = seed,
                              .alpha = alpha,
                              .beta = beta,
                              .gamma = cfg.gamma};
                rec.metrics = run_single(cfg, train, test, variant, mem, seed, alpha, beta);
                result.runs.push_back(std::move(rec));
            }
        }
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_runs_csv(cfg.out_dir + "/runs.csv", result);
        write_summary_json(cfg.out_dir + "/summary.json", cfg, result);
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.data_dir.empty())
        throw ConfigError("no data directory: pass data_dir or set GMED_DATA_DIR");
    const Dataset train = load_idx(cfg.data_dir + "/train-images-idx3-ubyte",
                                   cfg.data_dir + "/train-labels-idx1-ubyte");
    const Dataset test = load_idx(cfg.data_dir + "/t10k-images-idx3-ubyte",
                                  cfg.data_dir + "/t10k-labels-idx1-ubyte");
    return run_experiment(cfg, train, test);
}

void write_runs_csv(const std::string& path, const ExperimentResult& result) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "seed,variant,dataset,mem_size,alpha,beta,gamma,final_acc,task_accs,pcr,wall_time_s\n";
    for (const auto& r : result.runs) {
        os << r.seed << ',' << r.variant << ',' << r.dataset << ',' << r.mem_size << ','
           << r.alpha << ',' << r.beta << ',' << r.gamma << ',' << r.metrics.final_accuracy
           << ',';
        for (std::size_t i = 0; i < r.metrics.per_task_accuracy.size(); ++i) {
            if (i) os << ';';
            os << r.metrics.per_task_accuracy[i];
        }
        os << ',';
        if (r.metrics.prediction_change_rate) os << *r.metrics.prediction_change_rate;
        os << ',' << r.metrics.wall_time_s << '\n';
    }
}

void write_summary_json(const std::string& path, const ExperimentConfig& cfg,
                        const ExperimentResult& result) {
    json root;
    root["dataset"] = cfg.dataset;
    root["n_seeds"] = cfg.n_seeds;
    root["base_seed"] = cfg.base_seed;
    root["lr"] = cfg.lr;
    root["batch_size"] = cfg.batch_size;
    root["fuzzy"] = cfg.fuzzy;
    if (result.tuned_alpha >= 0.0) {
        root["tuned_alpha"] = result.tuned_alpha;
        root["tuned_beta"] = result.tuned_beta;
    }

    struct Group {
        std::string variant;
        int mem_size;
        std::vector<double> finals;
        std::vector<const RunMetrics*> metrics;
    };
    std::vector<Group> groups;
    auto find_group = [&](const RunRecord& r) -> Group& {
        for (auto& g : groups)
            if (g.variant == r.variant && g.mem_size == r.mem_size) return g;
        groups.push_back({r.variant, r.mem_size, {}, {}});
        return groups.back();
    };
    for (const auto& r : result.runs) {
        auto& g = find_group(r);
        g.finals.push_back(r.metrics.final_accuracy);
        g.metrics.push_back(&r.metrics);
    }

    root["groups"] = json::array();
    for (const auto& g : groups) {
        const auto ms = mean_std(g.finals);
        json jg;
        jg["variant"] = g.variant;
        jg["mem_size"] = g.mem_size;
        jg["n_runs"] = g.finals.size();
        jg["final_acc_mean"] = ms.mean;
        jg["final_acc_std"] = ms.std;
        std::vector<double> walls;
        for (const auto* m : g.metrics) walls.push_back(m->wall_time_s);
        jg["wall_time_s_mean"] = mean_std(walls).mean;
        std::vector<double> pcrs, cosines;
        for (const auto* m : g.metrics) {
            if (m->prediction_change_rate) pcrs.push_back(*m->prediction_change_rate);
            if (!m->cosine_trace.empty()) {
                double s = 0;
                for (const auto& [t, c] : m->cosine_trace) s += c;
                cosines.push_back(s / double(m->cosine_trace.size()));
            }
        }
        if (!pcrs.empty()) {
            jg["pcr_mean"] = mean_std(pcrs).mean;
            jg["pcr_std"] = mean_std(pcrs).std;
        }
        if (!cosines.empty()) {
            jg["cosine_mean"] = mean_std(cosines).mean;
            jg["cosine_std"] = mean_std(cosines).std;
        }
        root["groups"].push_back(jg);
    }

    // One-sided paired tests between every ordered pair sharing a memory size.
    root["pairwise_p"] = json::array();
    for (const auto& a : groups) {
        for (const auto& b : groups) {
            if (&a == &b || a.mem_size != b.mem_size) continue;
            if (a.finals.size() != b.finals.size() || a.finals.size() < 2) continue;
            json jp;
            jp["a"] = a.variant;
            jp["b"] = b.variant;
            jp["mem_size"] = a.mem_size;
            jp["p_a_greater"] = paired_t_test_one_sided(a.finals, b.finals);
            root["pairwise_p"].push_back(jp);
        }
    }

    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << root.dump(2) << '\n';
}

}  // namespace gmed
