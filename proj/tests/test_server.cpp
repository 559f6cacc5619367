#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <vector>

#include "costs.hpp"
#include "data_synth.hpp"
#include "errors.hpp"
#include "server.hpp"

using namespace lcfed;

namespace {

const ModelArch kArch{{6, 8, 3}, 1};

std::vector<DeviceShard> small_task(int m = 12, std::uint64_t seed = 5) {
    return make_synthetic_clusters(3, m, 6, 3, 60, seed);
}

SimOptions opts_for(StrategyKind s) {
    SimOptions o;
    o.strategy = s;
    o.k = 3;
    o.d = 4;
    o.hyper.eta = 0.05;
    o.hyper.local_steps = 3;
    return o;
}

ParamVec const_model(double v) {
    return ParamVec{std::vector<double>(kArch.total_dim(), v), kArch};
}

bool same_metrics(const RoundMetrics& a, const RoundMetrics& b) {
    auto eq = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    return a.round == b.round && eq(a.mean_acc, b.mean_acc) &&
           eq(a.std_acc, b.std_acc) && eq(a.ari, b.ari) &&
           a.sim_flops == b.sim_flops && a.bytes_up == b.bytes_up &&
           a.bytes_down == b.bytes_down && a.cluster_sizes == b.cluster_sizes;
}

} // namespace

TEST_CASE("round and device substreams never collide") {
    std::set<std::uint64_t> seen;
    for (int r = 1; r <= 50; ++r)
        for (int dev = 0; dev < 50; ++dev)
            seen.insert(device_round_seed(42, r, dev));
    CHECK(seen.size() == 2500);
    CHECK(device_round_seed(42, 3, 7) == device_round_seed(42, 3, 7));
    CHECK(device_round_seed(42, 3, 7) != device_round_seed(43, 3, 7));
}

TEST_CASE("global embedding is the mean of the phi blocks") {
    ParamVec a = const_model(1.0), b = const_model(3.0);
    auto phi = aggregate_global_embedding({a, b});
    REQUIRE(phi.size() == kArch.phi_dim());
    for (double v : phi) CHECK(v == 2.0);

    // opposite models cancel exactly
    ParamVec c = const_model(-1.0);
    for (double v : aggregate_global_embedding({a, c})) CHECK(v == 0.0);
    for (double v : aggregate_global_embedding({a})) CHECK(v == 1.0);
}

TEST_CASE("cluster centers average members and keep empty slots") {
    ParamVec a = const_model(2.0), b = const_model(4.0), c = const_model(9.0);
    Assignment assign;
    assign.num_clusters = 3;
    assign.cluster_of = {0, 0, 2}; // cluster 1 is empty
    std::vector<ParamVec> prev{const_model(-1.0), const_model(-2.0),
                               const_model(-3.0)};
    auto centers = aggregate_cluster_centers({a, b, c}, assign, prev);
    REQUIRE(centers.size() == 3);
    for (double v : centers[0].values) CHECK(v == 3.0);
    for (double v : centers[1].values) CHECK(v == -2.0); // retained
    for (double v : centers[2].values) CHECK(v == 9.0);
}

TEST_CASE("simulations are deterministic object to object") {
    for (StrategyKind s :
         {StrategyKind::fedavg, StrategyKind::fesem, StrategyKind::lcfed}) {
        Simulation sim1(kArch, small_task(), opts_for(s), 11);
        Simulation sim2(kArch, small_task(), opts_for(s), 11);
        for (int r = 0; r < 3; ++r) {
            RoundMetrics m1 = sim1.run_round();
            RoundMetrics m2 = sim2.run_round();
            CHECK(same_metrics(m1, m2));
        }
        for (std::size_t i = 0; i < sim1.device_models().size(); ++i)
            CHECK(sim1.device_models()[i].values ==
                  sim2.device_models()[i].values);
    }
}

TEST_CASE("results do not depend on the worker count") {
    auto run = [](const char* threads) {
        setenv("LCFED_THREADS", threads, 1);
        Simulation sim(kArch, small_task(), opts_for(StrategyKind::lcfed), 3);
        RoundMetrics last{};
        for (int r = 0; r < 3; ++r) last = sim.run_round();
        unsetenv("LCFED_THREADS");
        return std::make_pair(last, sim.device_models()[5].values);
    };
    auto [m1, w1] = run("1");
    auto [m8, w8] = run("8");
    CHECK(same_metrics(m1, m8));
    CHECK(w1 == w8);
}

TEST_CASE("single-model strategies force one cluster") {
    for (StrategyKind s : {StrategyKind::fedavg, StrategyKind::fedper}) {
        Simulation sim(kArch, small_task(), opts_for(s), 1);
        CHECK(sim.cluster_count() == 1);
        RoundMetrics m = sim.run_round();
        CHECK(m.round == 1);
        CHECK(m.cluster_sizes == std::vector<int>{12});
        CHECK(m.sim_flops == 0);
        for (int c : sim.assignment().cluster_of) CHECK(c == 0);
    }
}

TEST_CASE("ifca with a single center reduces to plain averaging") {
    SimOptions oa = opts_for(StrategyKind::fedavg);
    SimOptions oi = opts_for(StrategyKind::ifca);
    oi.k = 1;
    Simulation fa(kArch, small_task(), oa, 21);
    Simulation fi(kArch, small_task(), oi, 21);
    for (int r = 0; r < 3; ++r) {
        RoundMetrics ma = fa.run_round();
        RoundMetrics mi = fi.run_round();
        CHECK(ma.mean_acc == mi.mean_acc);
        CHECK(ma.std_acc == mi.std_acc);
        CHECK(ma.bytes_up == mi.bytes_up);
        CHECK(ma.bytes_down == mi.bytes_down);
    }
    CHECK(fa.centers()[0].values == fi.centers()[0].values);
}

TEST_CASE("first-round embedding agrees between single-model strategies") {
    // from a common initialization, round 1 of fedper trains exactly the
    // models plain averaging trains, so the shared embedding must match the
    // phi block of the averaged model bit for bit
    Simulation fa(kArch, small_task(), opts_for(StrategyKind::fedavg), 31);
    Simulation fp(kArch, small_task(), opts_for(StrategyKind::fedper), 31);
    fa.run_round();
    fp.run_round();

    auto phi_fp = aggregate_global_embedding(fp.device_models());
    const auto& avg = fa.centers()[0];
    for (std::size_t i = 0; i < phi_fp.size(); ++i)
        CHECK(phi_fp[i] == avg.values[i]);
}

TEST_CASE("partial participation trains only the sampled devices") {
    SimOptions o = opts_for(StrategyKind::fedavg);
    o.sample_fraction = 0.5;
    Simulation sim(kArch, small_task(), o, 17);
    const auto before = sim.device_models();
    RoundMetrics m = sim.run_round();

    int changed = 0;
    for (std::size_t i = 0; i < before.size(); ++i)
        changed += (sim.device_models()[i].values != before[i].values);
    CHECK(changed == 6); // llround(0.5 * 12)

    // uplink counts only the participants
    CHECK(m.bytes_up == 6 * kArch.total_dim() * 4);

    SimOptions bad = o;
    bad.sample_fraction = 0.0;
    CHECK_THROWS_AS(Simulation(kArch, small_task(), bad, 1), ConfigError);
}

TEST_CASE("low-rank strategy carries a fitted projector") {
    SimOptions o = opts_for(StrategyKind::lcfed);
    Simulation sim(kArch, small_task(), o, 9);
    REQUIRE(sim.projector() != nullptr);
    CHECK(sim.projector()->d == 4);
    CHECK(sim.projector()->input_dim == kArch.total_dim());
    CHECK_FALSE(sim.projector()->fitted_from.empty());

    // d is clamped by the warm-up pool: 3 warm devices can only support
    // a rank-3 sketch
    SimOptions tight = o;
    tight.warmup_devices = 3;
    Simulation clamped(kArch, small_task(), tight, 9);
    CHECK(clamped.projector()->d == 3);

    for (StrategyKind s : {StrategyKind::fedavg, StrategyKind::fesem})
        CHECK(Simulation(kArch, small_task(), opts_for(s), 9).projector() ==
              nullptr);
}

TEST_CASE("round metrics carry the analytic costs") {
    SimOptions o = opts_for(StrategyKind::lcfed);
    Simulation sim(kArch, small_task(), o, 13);
    RoundMetrics m = sim.run_round();
    CHECK(m.round == 1);

    const std::uint64_t dim = kArch.total_dim();
    const std::uint64_t dim_phi = kArch.phi_dim();
    const int d_eff = sim.projector()->d;
    CHECK(m.sim_flops ==
          similarity_flops(StrategyKind::lcfed, 12, 3, dim, d_eff));
    CommBytes cb = comm_bytes(StrategyKind::lcfed, 12, 3, dim, dim_phi,
                              d_eff, 4);
    CHECK(m.bytes_up == cb.up);
    CHECK(m.bytes_down == cb.down);

    int total = 0;
    for (int s : m.cluster_sizes) total += s;
    CHECK(total == 12);
    CHECK(m.ari == m.ari); // ground truth exists, so ari is a number
    CHECK(m.mean_acc >= 0.0);
    CHECK(m.mean_acc <= 1.0);
    CHECK(m.std_acc >= 0.0);
}

TEST_CASE("ari is nan without full ground truth") {
    auto shards = small_task();
    shards[4].true_cluster.reset();
    Simulation sim(kArch, std::move(shards), opts_for(StrategyKind::fesem), 7);
    CHECK(sim.true_clusters().empty());
    RoundMetrics m = sim.run_round();
    CHECK(std::isnan(m.ari));
}

TEST_CASE("divergence reports the device and round") {
    SimOptions o = opts_for(StrategyKind::fedavg);
    o.hyper.eta = 1e155;
    Simulation sim(kArch, small_task(), o, 2);
    try {
        sim.run_round();
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(e.device >= 0);
        CHECK(e.round == 1);
        const std::string msg = e.what();
        CHECK(msg.find("device") != std::string::npos);
        CHECK(msg.find("round") != std::string::npos);
    }
}

TEST_CASE("warm-up divergence still names the device") {
    SimOptions o = opts_for(StrategyKind::lcfed); // warm-up pool in the ctor
    o.hyper.eta = 1e155;
    try {
        Simulation sim(kArch, small_task(), o, 2);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(e.device >= 0);
        CHECK(e.round == 0);
        const std::string msg = e.what();
        CHECK(msg.find("device") != std::string::npos);
        CHECK(msg.find("warm-up") != std::string::npos);
    }
}

TEST_CASE("constructor rejects inconsistent inputs") {
    CHECK_THROWS_AS(
        Simulation(kArch, {}, opts_for(StrategyKind::fedavg), 1),
        ConfigError);

    auto shards = small_task();
    shards[3].train = Examples{};
    shards[3].train.feature_dim = 6;
    CHECK_THROWS_AS(
        Simulation(kArch, std::move(shards), opts_for(StrategyKind::fedavg), 1),
        ConfigError);

    auto wrong = make_synthetic_clusters(2, 4, 5, 3, 20, 1); // dim 5 != 6
    CHECK_THROWS_AS(
        Simulation(kArch, std::move(wrong), opts_for(StrategyKind::fedavg), 1),
        ConfigError);
}

TEST_CASE("one-shot grouping stays frozen after its round") {
    SimOptions o = opts_for(StrategyKind::fedgroup);
    o.offline_round = 2;
    Simulation sim(kArch, small_task(), o, 19);

    RoundMetrics m1 = sim.run_round();
    CHECK(m1.sim_flops == 0); // not yet clustered
    CHECK(m1.cluster_sizes == std::vector<int>{12, 0, 0});

    RoundMetrics m2 = sim.run_round();
    CHECK(m2.sim_flops ==
          similarity_flops(StrategyKind::fedgroup, 12, 3, kArch.total_dim(), 0));
    const auto frozen = sim.assignment().cluster_of;
    CHECK(std::set<int>(frozen.begin(), frozen.end()).size() > 1);

    RoundMetrics m3 = sim.run_round();
    CHECK(m3.sim_flops == 0); // frozen afterwards
    CHECK(sim.assignment().cluster_of == frozen);
}

TEST_CASE("online assignments track the planted clusters") {
    // light smoke of clustering quality; the acceptance suite pins the
    // strong thresholds
    SimOptions o = opts_for(StrategyKind::lcfed);
    Simulation sim(kArch, small_task(), o, 23);
    RoundMetrics last{};
    for (int r = 0; r < 5; ++r) last = sim.run_round();
    CHECK(last.ari > 0.3);
    CHECK(last.mean_acc > 1.0 / 3.0);
}
