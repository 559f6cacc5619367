#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "costs.hpp"
#include "errors.hpp"
#include "experiment.hpp"

using namespace lcfed;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig =
    "# comment line\n"
    "strategies = lcfed, fedavg\n"
    "seeds = 3, 4\n"
    "\n"
    "data.source = synthetic\n"
    "data.k_true = 2\n"
    "data.input_dim = 5\n"
    "data.classes = 3\n"
    "data.samples_per_device = 30\n"
    "model.layers = 5, 6, 3\n"
    "model.split_layer = 1\n"
    "train.eta = 0.05\n"
    "train.mu = 0.2\n"
    "train.lambda = 0.3\n"
    "train.batch_size = 8\n"
    "train.local_steps = 2\n"
    "run.m = 6\n"
    "run.k = 2\n"
    "run.d = 3\n"
    "run.rounds = 2\n"
    "run.sample_fraction = 1.0\n"
    "cost.bytes_per_scalar = 8\n"
    "out.dir = unused\n";

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const char* name) {
    fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("strategy names round-trip") {
    for (const char* n :
         {"fedavg", "fedper", "fesem", "fedgroup", "cgpfl", "ifca", "lcfed"})
        CHECK(strategy_name(parse_strategy(n)) == std::string(n));
    try {
        parse_strategy("sgd");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sgd") != std::string::npos);
        CHECK(msg.find("lcfed") != std::string::npos); // lists valid names
    }
}

TEST_CASE("similarity flops oracle values") {
    // [DERIVED] 3 flops per multiply-accumulate pair entry: one K-way
    // comparison over m devices costs 3*m*K*len for cosine/L2 in `len`
    // dimensions; the low-rank variant adds the m sketch projections
    const std::uint64_t dim = 4'800'000;
    CHECK(similarity_flops(StrategyKind::fesem, 100, 10, dim, 50) ==
          14'400'000'000ull);
    CHECK(similarity_flops(StrategyKind::fedgroup, 100, 10, dim, 50) ==
          14'400'000'000ull);
    CHECK(similarity_flops(StrategyKind::cgpfl, 100, 10, dim, 50) ==
          14'400'000'000ull);
    CHECK(similarity_flops(StrategyKind::lcfed, 100, 10, dim, 50) == 155'000);
    CHECK(similarity_flops(StrategyKind::fedavg, 100, 10, dim, 50) == 0);
    CHECK(similarity_flops(StrategyKind::fedper, 100, 10, dim, 50) == 0);
    CHECK(similarity_flops(StrategyKind::ifca, 100, 10, dim, 50) == 0);
}

TEST_CASE("communication bytes oracle values") {
    // m_sel=2, K=3, dim=10, dim_phi=4, D=2, 4 bytes per scalar
    CommBytes fa = comm_bytes(StrategyKind::fedavg, 2, 3, 10, 4, 2, 4);
    CHECK(fa.up == 80);
    CHECK(fa.down == 80);

    CommBytes fp = comm_bytes(StrategyKind::fedper, 2, 3, 10, 4, 2, 4);
    CHECK(fp.up == 80);
    CHECK(fp.down == 80);

    CommBytes fi = comm_bytes(StrategyKind::ifca, 2, 3, 10, 4, 2, 4);
    CHECK(fi.up == 80);
    CHECK(fi.down == 240); // K centers broadcast

    CommBytes lc = comm_bytes(StrategyKind::lcfed, 2, 3, 10, 4, 2, 4);
    CHECK(lc.up == 96);    // model + D-entry sketch
    CHECK(lc.down == 112); // assigned center + global embedding

    CommBytes fg = comm_bytes(StrategyKind::fedgroup, 2, 3, 10, 4, 2, 4);
    CHECK(fg.up == 80);
    CHECK(fg.down == 80);
}

TEST_CASE("cost report prints the reference scales") {
    std::string report = cost_report_text(100, 10, 4'800'000, 2'400'000, 50, 4);
    CHECK(report.find("m=100 k=10") != std::string::npos);
    CHECK(report.find("m=1000 k=100") != std::string::npos);
    CHECK(report.find("14400000000") != std::string::npos);
    CHECK(report.find("155000") != std::string::npos);
    CHECK(report.find("reduction factor (dim/d): 96000") != std::string::npos);

    // a non-reference scale is shown in addition to the two fixed ones
    std::string custom = cost_report_text(7, 2, 1000, 500, 10, 4);
    CHECK(custom.find("m=7 k=2") != std::string::npos);
    CHECK(custom.find("m=100 k=10") != std::string::npos);
}

TEST_CASE("config text parses every key") {
    ExperimentConfig cfg = parse_config_text(kSmallConfig);
    REQUIRE(cfg.strategies.size() == 2);
    CHECK(cfg.strategies[0] == StrategyKind::lcfed);
    CHECK(cfg.strategies[1] == StrategyKind::fedavg);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(cfg.source == DataSource::synthetic);
    CHECK(cfg.k_true == 2);
    CHECK(cfg.input_dim == 5);
    CHECK(cfg.classes == 3);
    CHECK(cfg.samples_per_device == 30);
    CHECK(cfg.arch.layer_sizes == std::vector<int>{5, 6, 3});
    CHECK(cfg.arch.split_layer == 1);
    CHECK(cfg.hyper.eta == 0.05);
    CHECK(cfg.hyper.mu == 0.2);
    CHECK(cfg.hyper.lambda == 0.3);
    CHECK(cfg.hyper.batch_size == 8);
    CHECK(cfg.hyper.local_steps == 2);
    CHECK(cfg.m == 6);
    CHECK(cfg.k == 2);
    CHECK(cfg.d == 3);
    CHECK(cfg.rounds == 2);
    CHECK(cfg.sample_fraction == 1.0);
    CHECK(cfg.bytes_per_scalar == 8);
    CHECK(cfg.out_dir == "unused");
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config errors name the key and line") {
    try {
        parse_config_text("run.m = 4\nnot_a_key = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("not_a_key") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
    }
    try {
        parse_config_text("run.m = soon\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.m") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("just some words\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("strategies = warp\n"), ConfigError);
}

TEST_CASE("config validation names the offending field") {
    auto expect_field = [](ExperimentConfig cfg, const char* field) {
        try {
            cfg.validate();
            FAIL_CHECK("expected ConfigError for ", field);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    ExperimentConfig base = parse_config_text(kSmallConfig);

    ExperimentConfig c = base;
    c.m = 0;
    expect_field(c, "run.m");
    c = base;
    c.sample_fraction = 1.5;
    expect_field(c, "run.sample_fraction");
    c = base;
    c.k_true = 40; // exceeds m
    expect_field(c, "data.k_true");
    c = base;
    c.input_dim = 7; // disagrees with model.layers
    expect_field(c, "data.input_dim");
    c = base;
    c.classes = 4;
    expect_field(c, "data.classes");
    c = base;
    c.source = DataSource::idx_files;
    expect_field(c, "data.images");
    c = base;
    c.rounds = 0;
    expect_field(c, "run.rounds");
}

TEST_CASE("csv header and row formatting") {
    CHECK(std::string(kCsvHeader) ==
          "round,strategy,seed,mean_acc,std_acc,ari,"
          "sim_flops,bytes_up,bytes_down,cluster_sizes");

    RoundMetrics m;
    m.round = 5;
    m.mean_acc = 1.0 / 3.0;
    m.std_acc = 0.25;
    m.ari = std::nan("");
    m.sim_flops = 150;
    m.bytes_up = 1920;
    m.bytes_down = 640;
    m.cluster_sizes = {3, 0, 9};
    CHECK(format_metrics_row(StrategyKind::lcfed, 7, m) ==
          "5,lcfed,7,0.3333333333,0.25,nan,150,1920,640,\"3;0;9\"");

    m.ari = 1.0;
    m.cluster_sizes = {12};
    CHECK(format_metrics_row(StrategyKind::fedavg, 42, m) ==
          "5,fedavg,42,0.3333333333,0.25,1,150,1920,640,\"12\"");
}

TEST_CASE("shards are rebuilt identically for a seed") {
    ExperimentConfig cfg = parse_config_text(kSmallConfig);
    auto a = build_shards(cfg, 3);
    auto b = build_shards(cfg, 3);
    auto c = build_shards(cfg, 4);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].train.features == b[i].train.features);
        CHECK(a[i].train.labels == b[i].train.labels);
    }
    CHECK(a[0].train.features != c[0].train.features);

    SimOptions so = sim_options(cfg, StrategyKind::lcfed);
    CHECK(so.strategy == StrategyKind::lcfed);
    CHECK(so.k == 2);
    CHECK(so.d == 3);
    CHECK(so.bytes_per_scalar == 8);
    CHECK(so.hyper.mu == 0.2);
}

TEST_CASE("experiment writes one csv per pair plus a summary") {
    ExperimentConfig cfg = parse_config_text(kSmallConfig);
    fs::path out = fresh_dir("lcfed_exp_out");
    cfg.out_dir = out.string();
    run_experiment(cfg);

    for (const char* name : {"lcfed_seed3.csv", "lcfed_seed4.csv",
                             "fedavg_seed3.csv", "fedavg_seed4.csv"}) {
        fs::path p = out / name;
        REQUIRE_MESSAGE(fs::exists(p), name);
        std::string text = slurp(p);
        CHECK(text.find('\r') == std::string::npos); // LF endings only
        std::istringstream lines(text);
        std::string line;
        std::getline(lines, line);
        CHECK(line == kCsvHeader);
        int rows = 0;
        while (std::getline(lines, line))
            if (!line.empty()) ++rows;
        CHECK(rows == cfg.rounds);
        // rows start with "1," and carry the right strategy name
        CHECK(slurp(p).find("1," + std::string(name).substr(
                                       0, std::string(name).find('_'))) !=
              std::string::npos);
    }

    REQUIRE(fs::exists(out / "summary.json"));
    std::string js = slurp(out / "summary.json");
    CHECK(js.find("\"strategies\"") != std::string::npos);
    CHECK(js.find("\"lcfed\"") != std::string::npos);
    CHECK(js.find("\"fedavg\"") != std::string::npos);
    CHECK(js.find("\"final_mean_acc\"") != std::string::npos);
    CHECK(js.find("\"per_seed\"") != std::string::npos);

    // a second run into a fresh directory is byte-identical
    fs::path out2 = fresh_dir("lcfed_exp_out2");
    cfg.out_dir = out2.string();
    run_experiment(cfg);
    for (const char* name : {"lcfed_seed3.csv", "fedavg_seed4.csv",
                             "summary.json"})
        CHECK(slurp(out / name) == slurp(out2 / name));

    fs::remove_all(out);
    fs::remove_all(out2);
}

TEST_CASE("config file loader reports io failures") {
    CHECK_THROWS_AS(load_config_file("/no/such/lcfed.cfg"), IoError);

    fs::path p = fs::temp_directory_path() / "lcfed_cfg_ok.cfg";
    std::ofstream(p) << kSmallConfig;
    ExperimentConfig cfg = load_config_file(p.string());
    CHECK(cfg.m == 6);
    fs::remove(p);
}
