#include <doctest.h>

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "gmed/experiment.hpp"
#include "test_support.hpp"

using namespace gmed;

TEST_CASE("config file parsing") {
    const auto path = testsup::temp_path("config.cfg");
    SUBCASE("keys, comments and whitespace") {
        std::ofstream(path) << "# experiment setup\n"
                               "dataset = permuted_mnist\n"
                               "variant = er, er_gmed\n"
                               "mem_size= 200,500\n"
                               "alpha = 0.5   # inline comment\n"
                               "fuzzy = true\n"
                               "\n"
                               "seeds = 3\n";
        auto cfg = parse_config(path, {});
        CHECK(cfg.dataset == "permuted_mnist");
        CHECK(cfg.variants == std::vector<std::string>{"er", "er_gmed"});
        CHECK(cfg.mem_sizes == std::vector<int>{200, 500});
        CHECK(cfg.alpha == 0.5);
        CHECK(cfg.fuzzy);
        CHECK(cfg.n_seeds == 3);
        CHECK(cfg.batch_size == 10);  // untouched defaults survive
    }
    SUBCASE("overrides win over file values") {
        std::ofstream(path) << "alpha = 0.5\nbeta = 0.1\n";
        auto cfg = parse_config(path, {{"alpha", "2.0"}, {"gamma", "0.9"}});
        CHECK(cfg.alpha == 2.0);
        CHECK(cfg.beta == 0.1);
        CHECK(cfg.gamma == 0.9);
    }
    SUBCASE("unknown key is rejected with the key named") {
        std::ofstream(path) << "aplha = 0.5\n";
        CHECK_THROWS_WITH_AS(parse_config(path, {}), "unknown config key: 'aplha'", ConfigError);
    }
    SUBCASE("malformed values are rejected") {
        CHECK_THROWS_AS(parse_config("", {{"alpha", "fast"}}), ConfigError);
        CHECK_THROWS_AS(parse_config("", {{"seeds", "3.5"}}), ConfigError);
        CHECK_THROWS_AS(parse_config("", {{"fuzzy", "maybe"}}), ConfigError);
        CHECK_THROWS_AS(parse_config("", {{"edit_kind", "massage"}}), ConfigError);
        CHECK_THROWS_AS(parse_config("", {{"augment", "flip"}}), ConfigError);
        CHECK_THROWS_AS(parse_config("", {{"variant", " , "}}), ConfigError);
    }
    SUBCASE("line without equals sign is rejected") {
        std::ofstream(path) << "alpha 0.5\n";
        CHECK_THROWS_AS(parse_config(path, {}), ConfigError);
    }
    SUBCASE("missing file is rejected") {
        CHECK_THROWS_AS(parse_config("/nonexistent.cfg", {}), ConfigError);
    }
    std::remove(path.c_str());
}

TEST_CASE("per-dataset hyperparameter defaults") {
    ExperimentConfig cfg;
    cfg.dataset = "split_mnist";
    CHECK(cfg.resolved_alpha() == 5.0);
    CHECK(cfg.resolved_beta() == 0.01);
    cfg.dataset = "permuted_mnist";
    CHECK(cfg.resolved_alpha() == 0.05);
    CHECK(cfg.resolved_beta() == 0.001);
    cfg.dataset = "rotated_mnist";
    CHECK(cfg.resolved_alpha() == 1.0);
    CHECK(cfg.resolved_beta() == 0.01);
    // explicit values always win
    cfg.alpha = 0.25;
    cfg.beta = 0.0;
    CHECK(cfg.resolved_alpha() == 0.25);
    CHECK(cfg.resolved_beta() == 0.0);
}

TEST_CASE("name mappings") {
    CHECK(dataset_kind("split_mnist") == StreamKind::Split);
    CHECK(dataset_kind("permuted_mnist") == StreamKind::Permuted);
    CHECK(dataset_kind("rotated_mnist") == StreamKind::Rotated);
    CHECK_THROWS_AS(dataset_kind("cifar"), ConfigError);

    RunMode mode;
    CHECK(variant_from_string("er", mode) == Variant::Er);
    CHECK(mode == RunMode::Sequential);
    CHECK(variant_from_string("er_gmed", mode) == Variant::ErGmed);
    CHECK(variant_from_string("mir_gmed", mode) == Variant::MirGmed);
    CHECK(variant_from_string("agem", mode) == Variant::Agem);
    CHECK(variant_from_string("iid_online", mode) == Variant::Finetune);
    CHECK(mode == RunMode::IidOnline);
    CHECK(variant_from_string("iid_offline", mode) == Variant::Finetune);
    CHECK(mode == RunMode::IidOffline);
    CHECK_THROWS_AS(variant_from_string("der", mode), ConfigError);

    CHECK(edit_kind_from_string("gmed") == EditKind::Gmed);
    CHECK(edit_kind_from_string("random") == EditKind::Random);
    CHECK(edit_kind_from_string("adversarial") == EditKind::Adversarial);
    CHECK(edit_kind_from_string("none") == EditKind::None);
    CHECK_THROWS_AS(edit_kind_from_string(""), ConfigError);
}

namespace {

ExperimentConfig tiny_cfg() {
    ExperimentConfig cfg;
    cfg.dataset = "split_mnist";
    cfg.n_tasks = 2;
    cfg.examples_per_task = 50;
    cfg.mem_sizes = {20};
    cfg.n_seeds = 2;
    cfg.out_dir.clear();
    return cfg;
}

}  // namespace

TEST_CASE("tune_hyperparams on a tiny stream") {
    auto ds = testsup::synthetic_dataset(80);
    auto cfg = tiny_cfg();

    SUBCASE("a single-pair grid is returned as-is") {
        auto [a, b] = tune_hyperparams(cfg, ds, ds, {0.3}, {0.07});
        CHECK(a == 0.3);
        CHECK(b == 0.07);
    }
    SUBCASE("exact ties keep the earliest grid entry") {
        // alpha = 0 makes every beta equivalent, so the first beta must win
        auto [a1, b1] = tune_hyperparams(cfg, ds, ds, {0.0}, {0.1, 0.3});
        CHECK(b1 == 0.1);
        auto [a2, b2] = tune_hyperparams(cfg, ds, ds, {0.0}, {0.3, 0.1});
        CHECK(b2 == 0.3);
    }
    SUBCASE("empty grids are rejected") {
        CHECK_THROWS_AS(tune_hyperparams(cfg, ds, ds, {}, {0.1}), ConfigError);
        CHECK_THROWS_AS(tune_hyperparams(cfg, ds, ds, {0.1}, {}), ConfigError);
    }
}

TEST_CASE("run_experiment produces runs, csv and summary") {
    auto ds = testsup::synthetic_dataset(80);
    auto cfg = tiny_cfg();
    cfg.variants = {"er", "finetune"};
    cfg.out_dir = testsup::temp_path("outdir");
    cfg.pcr = true;

    auto result = run_experiment(cfg, ds, ds);
    REQUIRE(result.runs.size() == 4);  // 2 variants x 1 mem x 2 seeds
    for (const auto& r : result.runs) {
        CHECK(r.metrics.per_task_accuracy.size() == 2);
        CHECK(r.metrics.final_accuracy >= 0.0);
        CHECK(r.metrics.final_accuracy <= 1.0);
        CHECK(r.metrics.wall_time_s > 0.0);
    }
    CHECK(result.runs[0].seed == 0);
    CHECK(result.runs[1].seed == 1);
    CHECK(result.tuned_alpha == -1.0);  // tuning was off

    SUBCASE("seeded runs are reproducible") {
        auto again = run_experiment(cfg, ds, ds);
        for (std::size_t i = 0; i < result.runs.size(); ++i)
            CHECK(again.runs[i].metrics.final_accuracy ==
                  result.runs[i].metrics.final_accuracy);
    }
    SUBCASE("runs.csv has a header plus one line per run") {
        std::ifstream csv(cfg.out_dir + "/runs.csv");
        REQUIRE(csv.good());
        std::string line;
        std::getline(csv, line);
        CHECK(line ==
              "seed,variant,dataset,mem_size,alpha,beta,gamma,final_acc,task_accs,pcr,"
              "wall_time_s");
        int rows = 0;
        while (std::getline(csv, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 4);
    }
    SUBCASE("summary.json aggregates per group and reports paired p-values") {
        std::ifstream js(cfg.out_dir + "/summary.json");
        REQUIRE(js.good());
        auto root = nlohmann::json::parse(js);
        CHECK(root["dataset"] == "split_mnist");
        CHECK(root["n_seeds"] == 2);
        REQUIRE(root["groups"].size() == 2);
        for (const auto& g : root["groups"]) {
            CHECK(g["n_runs"] == 2);
            CHECK(g["mem_size"] == 20);
            CHECK(g["final_acc_mean"].get<double>() >= 0.0);
            CHECK(g.contains("pcr_mean"));
        }
        // ordered pairs in both directions for the shared memory size
        REQUIRE(root["pairwise_p"].size() == 2);
        double p_sum = 0;
        for (const auto& p : root["pairwise_p"]) p_sum += p["p_a_greater"].get<double>();
        CHECK(p_sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("run_experiment without data_dir or files fails cleanly") {
    ExperimentConfig cfg;
    cfg.data_dir.clear();
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
    cfg.data_dir = "/nonexistent";
    CHECK_THROWS_AS(run_experiment(cfg), IdxError);
}
