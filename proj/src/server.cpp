#include "server.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace lcfed {

namespace {

constexpr std::uint64_t kTagAssign = 0x61737367ULL;      // "assg"
constexpr std::uint64_t kTagWarm = 0x7761726dULL;        // "warm"
constexpr std::uint64_t kTagSample = 0x73616d70ULL;      // "samp"
constexpr std::uint64_t kTagRoundDevice = 0x726e6464ULL; // "rndd"

// k-means++-style deterministic seeding: start at index 0, then repeatedly
// take the element farthest (min distance to the chosen set) from what's
// picked, ties toward the lowest index. The distance callback lets each
// strategy seed in its own similarity space.
template <typename Dist>
std::vector<std::size_t> farthest_point_indices(std::size_t n, std::size_t k,
                                                Dist&& dist) {
    std::vector<std::size_t> picked;
    if (n == 0 || k == 0) return picked;
    picked.push_back(0);
    std::vector<double> min_d(n);
    for (std::size_t i = 0; i < n; ++i) min_d[i] = dist(i, 0);
    while (picked.size() < std::min(k, n)) {
        std::size_t best = 0;
        double best_v = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (min_d[i] > best_v) {
                best_v = min_d[i];
                best = i;
            }
        }
        picked.push_back(best);
        for (std::size_t i = 0; i < n; ++i)
            min_d[i] = std::min(min_d[i], dist(i, best));
    }
    return picked;
}

double l2_sq(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

} // namespace

std::uint64_t device_round_seed(std::uint64_t seed, int round, int device) {
    return mix_seed({seed, kTagRoundDevice, static_cast<std::uint64_t>(round),
                     static_cast<std::uint64_t>(device)});
}

std::vector<double> aggregate_global_embedding(
    const std::vector<ParamVec>& models) {
    const std::size_t dim_phi = models.front().arch.phi_dim();
    std::vector<double> phi(dim_phi, 0.0);
    for (const auto& m : models)
        for (std::size_t i = 0; i < dim_phi; ++i) phi[i] += m.values[i];
    const double inv = 1.0 / static_cast<double>(models.size());
    for (auto& v : phi) v *= inv;
    return phi;
}

std::vector<ParamVec> aggregate_cluster_centers(
    const std::vector<ParamVec>& models, const Assignment& assign,
    const std::vector<ParamVec>& previous) {
    const int k = assign.num_clusters;
    std::vector<ParamVec> centers = previous;
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    std::vector<std::vector<double>> sums(
        static_cast<std::size_t>(k),
        std::vector<double>(models.front().size(), 0.0));
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto c = static_cast<std::size_t>(assign.cluster_of[i]);
        ++counts[c];
        const auto& v = models[i].values;
        auto& s = sums[c];
        for (std::size_t j = 0; j < v.size(); ++j) s[j] += v[j];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) continue; // keep previous
        auto& dst = centers[static_cast<std::size_t>(c)].values;
        const auto& s = sums[static_cast<std::size_t>(c)];
        const double inv = 1.0 / counts[static_cast<std::size_t>(c)];
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = s[j] * inv;
    }
    return centers;
}

Simulation::Simulation(ModelArch arch, std::vector<DeviceShard> shards,
                       SimOptions opts, std::uint64_t seed)
    : arch_(std::move(arch)), shards_(std::move(shards)), opts_(opts),
      seed_(seed) {
    arch_.validate();
    opts_.hyper.validate();
    const auto m = shards_.size();
    if (m == 0) throw ConfigError("simulation needs at least one device");
    if (opts_.k < 1) throw ConfigError("k must be >= 1");
    if (!(opts_.sample_fraction > 0.0 && opts_.sample_fraction <= 1.0))
        throw ConfigError("sample_fraction must be in (0, 1]");
    if (opts_.offline_round < 1)
        throw ConfigError("offline_round must be >= 1");
    for (const auto& s : shards_) {
        if (s.train.empty())
            throw ConfigError("device " + std::to_string(s.device_id) +
                              " has no training data");
        if (s.train.feature_dim != static_cast<std::size_t>(arch_.input_dim()))
            throw ConfigError("device " + std::to_string(s.device_id) +
                              " feature dim does not match the model input");
    }

    const bool single_model = opts_.strategy == StrategyKind::fedavg ||
                              opts_.strategy == StrategyKind::fedper;
    k_eff_ = single_model ? 1 : opts_.k;

    ParamVec w0 = init_model(arch_, seed_);
    models_.assign(m, w0);
    centers_.assign(static_cast<std::size_t>(k_eff_), w0);
    global_phi_.assign(w0.values.begin(),
                       w0.values.begin() +
                           static_cast<std::ptrdiff_t>(arch_.phi_dim()));

    assign_.num_clusters = k_eff_;
    assign_.cluster_of.assign(m, 0);
    // fedgroup starts as one global group and clusters once at
    // offline_round; the online strategies start from a uniform random
    // assignment (every device holds the same initial model, so any
    // similarity-based initial assignment would degenerate to one cluster).
    const bool online_clustered = k_eff_ > 1 &&
                                  opts_.strategy != StrategyKind::fedgroup;
    if (online_clustered) {
        Rng r(mix_seed({seed_, kTagAssign}));
        for (auto& c : assign_.cluster_of)
            c = static_cast<int>(r.uniform_int(static_cast<std::uint64_t>(k_eff_)));
    }

    // Bootstrap for the strategies that need distinguishable centers (or a
    // projector) before round 1: a sampled subset runs one plain-SGD update
    // from the common initialization; the resulting models seed the
    // projector fit and, by farthest-point selection, the initial centers.
    // The warm-up models themselves are discarded — every device still
    // starts round 1 from the common initialization.
    const bool needs_warmup = online_clustered ||
                              opts_.strategy == StrategyKind::lcfed;
    if (needs_warmup) {
        // Default pool: ceil(m/5), grown to ~3 candidate seeds per cluster
        // so farthest-point selection reliably covers every concept, and to
        // d for lcfed so the projector fit is full-rank.
        std::size_t base = (m + 4) / 5;
        if (opts_.warmup_devices > 0) {
            base = static_cast<std::size_t>(opts_.warmup_devices);
        } else {
            base = std::max(base, static_cast<std::size_t>(3 * k_eff_));
            if (opts_.strategy == StrategyKind::lcfed)
                base = std::max(base, static_cast<std::size_t>(opts_.d));
        }
        std::size_t warm =
            std::min(m, std::max(base, static_cast<std::size_t>(k_eff_)));

        std::vector<std::size_t> ids(m);
        std::iota(ids.begin(), ids.end(), 0);
        Rng wr(mix_seed({seed_, kTagWarm}));
        wr.shuffle(ids);
        ids.resize(warm);
        std::sort(ids.begin(), ids.end());

        TrainHyper plain = opts_.hyper;
        plain.mu = 0.0;
        plain.lambda = 0.0;
        std::vector<ParamVec> warm_models(warm, w0);
        parallel_for(warm, [&](std::size_t j) {
            Rng r(mix_seed({seed_, kTagWarm, ids[j]}));
            try {
                warm_models[j] = local_update(w0, w0, {},
                                              shards_[ids[j]].train, plain, r);
            } catch (const NumericError& e) {
                NumericError annotated("device " + std::to_string(ids[j]) +
                                           ", warm-up: " + e.what(),
                                       e.step);
                annotated.device = static_cast<int>(ids[j]);
                annotated.round = 0; // precedes round 1
                throw annotated;
            }
        });

        if (opts_.strategy == StrategyKind::lcfed) {
            const int d_eff = static_cast<int>(std::min<std::size_t>(
                {static_cast<std::size_t>(opts_.d), warm, arch_.total_dim()}));
            opts_.d = d_eff;
            std::vector<int> fitted_ids(ids.begin(), ids.end());
            projector_ = fit_projector(warm_models, d_eff,
                                       std::move(fitted_ids));
        }

        // Seed the centers in the space each strategy measures similarity
        // in: sketch angles for lcfed, full-model angles for the cosine
        // strategies, plain L2 otherwise.
        std::vector<std::size_t> picked;
        const auto kk = static_cast<std::size_t>(k_eff_);
        if (opts_.strategy == StrategyKind::lcfed) {
            std::vector<std::vector<double>> sk(warm);
            for (std::size_t j = 0; j < warm; ++j)
                sk[j] = project(*projector_, warm_models[j]);
            picked = farthest_point_indices(warm, kk, [&](auto a, auto b) {
                return 1.0 - cosine_sim(sk[a], sk[b]);
            });
        } else if (opts_.strategy == StrategyKind::cgpfl) {
            picked = farthest_point_indices(warm, kk, [&](auto a, auto b) {
                return 1.0 - cosine_sim(warm_models[a].values,
                                        warm_models[b].values);
            });
        } else { // fesem's neg-L2, ifca's loss: L2 is the neutral choice
            picked = farthest_point_indices(warm, kk, [&](auto a, auto b) {
                return l2_sq(warm_models[a].values, warm_models[b].values);
            });
        }
        for (std::size_t c = 0; c < picked.size(); ++c)
            centers_[c] = warm_models[picked[c]];
        // if k exceeds the warm-up pool the rest keep the common init
    }

    if (opts_.strategy == StrategyKind::lcfed) {
        // One-time setup projections; afterwards low-rank centers are
        // maintained purely by averaging cached device sketches.
        std::vector<double> w0_sketch = project(*projector_, w0);
        lr_cache_.assign(m, w0_sketch);
        lr_centers_.resize(centers_.size());
        for (std::size_t c = 0; c < centers_.size(); ++c)
            lr_centers_[c] = project(*projector_, centers_[c]);
    }
}

std::vector<int> Simulation::true_clusters() const {
    std::vector<int> truth;
    truth.reserve(shards_.size());
    for (const auto& s : shards_) {
        if (!s.true_cluster) return {};
        truth.push_back(*s.true_cluster);
    }
    return truth;
}

std::vector<std::size_t> Simulation::sample_round_devices() {
    const std::size_t m = shards_.size();
    auto n_sel = static_cast<std::size_t>(
        std::llround(opts_.sample_fraction * static_cast<double>(m)));
    n_sel = std::clamp<std::size_t>(n_sel, 1, m);
    std::vector<std::size_t> ids(m);
    std::iota(ids.begin(), ids.end(), 0);
    if (n_sel == m) return ids; // full participation consumes no randomness
    Rng r(mix_seed({seed_, kTagSample, static_cast<std::uint64_t>(round_)}));
    r.shuffle(ids);
    ids.resize(n_sel);
    std::sort(ids.begin(), ids.end());
    return ids;
}

void Simulation::local_update_phase(const std::vector<std::size_t>& selected) {
    ifca_choice_.assign(shards_.size(), -1);
    const StrategyKind s = opts_.strategy;

    TrainHyper hy = opts_.hyper;
    switch (s) {
    case StrategyKind::fedavg:
    case StrategyKind::fedper:
    case StrategyKind::fedgroup:
    case StrategyKind::ifca:
        hy.mu = 0.0;
        hy.lambda = 0.0;
        break;
    case StrategyKind::fesem:
    case StrategyKind::cgpfl:
        hy.lambda = 0.0;
        break;
    case StrategyKind::lcfed:
        break;
    }

    parallel_for(selected.size(), [&](std::size_t idx) {
        const std::size_t i = selected[idx];
        Rng r(device_round_seed(seed_, round_, static_cast<int>(i)));
        const ParamVec* start = &models_[i];
        const ParamVec* center = &centers_[static_cast<std::size_t>(
            assign_.cluster_of[i])];
        ParamVec synced; // fedper's phi refresh needs a modified copy
        switch (s) {
        case StrategyKind::fedavg:
            start = &centers_[0];
            center = start;
            break;
        case StrategyKind::fedper: {
            synced = models_[i];
            std::copy(global_phi_.begin(), global_phi_.end(),
                      synced.values.begin());
            start = &synced;
            center = start;
            break;
        }
        case StrategyKind::fedgroup:
            start = center;
            break;
        case StrategyKind::ifca: {
            const int pick = ifca_assign(shards_[i].train, centers_);
            ifca_choice_[i] = pick;
            start = &centers_[static_cast<std::size_t>(pick)];
            center = start;
            break;
        }
        case StrategyKind::fesem:
        case StrategyKind::cgpfl:
        case StrategyKind::lcfed:
            break;
        }
        try {
            models_[i] = local_update(*start, *center,
                                      hy.lambda != 0.0 ? std::span<const double>(
                                                             global_phi_)
                                                       : std::span<const double>(),
                                      shards_[i].train, hy, r);
        } catch (const NumericError& e) {
            NumericError annotated("device " + std::to_string(i) + ", round " +
                                       std::to_string(round_) + ": " + e.what(),
                                   e.step);
            annotated.device = static_cast<int>(i);
            annotated.round = round_;
            throw annotated;
        }
        if (s == StrategyKind::lcfed)
            lr_cache_[i] = project(*projector_, models_[i]);
    });
}

void Simulation::update_assignment_phase(
    const std::vector<std::size_t>& selected) {
    const std::size_t m = shards_.size();
    const auto mk_flops = [&](std::uint64_t width) {
        return 3 * static_cast<std::uint64_t>(m) *
               static_cast<std::uint64_t>(k_eff_) * width;
    };
    round_sim_flops_ = 0;
    const StrategyKind s = opts_.strategy;

    if (s == StrategyKind::fedavg || s == StrategyKind::fedper) return;

    if (s == StrategyKind::ifca) {
        for (std::size_t i : selected)
            assign_.cluster_of[i] = ifca_choice_[i];
        return;
    }

    if (s == StrategyKind::fedgroup) {
        if (fedgroup_clustered_ || round_ != opts_.offline_round) return;
        // one-shot offline clustering: farthest-point seeds from the
        // current device models (angular, matching the cosine assignment),
        // then a full-cosine assignment pass
        const auto seeds = farthest_point_indices(
            m, static_cast<std::size_t>(k_eff_), [&](auto a, auto b) {
                return 1.0 - cosine_sim(models_[a].values, models_[b].values);
            });
        std::vector<std::vector<double>> sim(
            m, std::vector<double>(static_cast<std::size_t>(k_eff_),
                                   -2.0)); // below any cosine
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < seeds.size(); ++c)
                sim[i][c] = cosine_sim(models_[i].values,
                                       models_[seeds[c]].values);
        assign_ = update_assignments(sim);
        fedgroup_clustered_ = true;
        round_sim_flops_ = mk_flops(arch_.total_dim());
        return;
    }

    std::vector<std::vector<double>> sim(
        m, std::vector<double>(static_cast<std::size_t>(k_eff_), 0.0));
    if (s == StrategyKind::lcfed) {
        for (std::size_t i = 0; i < m; ++i)
            for (int c = 0; c < k_eff_; ++c)
                sim[i][static_cast<std::size_t>(c)] = cosine_sim(
                    lr_cache_[i], lr_centers_[static_cast<std::size_t>(c)]);
        round_sim_flops_ =
            mk_flops(static_cast<std::uint64_t>(opts_.d)) +
            static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(opts_.d);
    } else { // fesem (neg-L2) and cgpfl (full cosine)
        for (std::size_t i = 0; i < m; ++i)
            for (int c = 0; c < k_eff_; ++c) {
                const auto& ctr = centers_[static_cast<std::size_t>(c)].values;
                sim[i][static_cast<std::size_t>(c)] =
                    s == StrategyKind::fesem
                        ? neg_l2_sim(models_[i].values, ctr)
                        : cosine_sim(models_[i].values, ctr);
            }
        round_sim_flops_ = mk_flops(arch_.total_dim());
    }
    assign_ = update_assignments(sim);
}

void Simulation::aggregate_phase() {
    global_phi_ = aggregate_global_embedding(models_);
    centers_ = aggregate_cluster_centers(models_, assign_, centers_);
    if (opts_.strategy != StrategyKind::lcfed) return;
    // low-rank centers by averaging cached sketches (projection is linear,
    // so this equals projecting the freshly averaged full centers)
    const auto d = static_cast<std::size_t>(opts_.d);
    for (int c = 0; c < k_eff_; ++c) {
        std::vector<double> sum(d, 0.0);
        int count = 0;
        for (std::size_t i = 0; i < shards_.size(); ++i) {
            if (assign_.cluster_of[i] != c) continue;
            ++count;
            for (std::size_t j = 0; j < d; ++j) sum[j] += lr_cache_[i][j];
        }
        if (count == 0) continue; // keep previous sketch, like the center
        for (std::size_t j = 0; j < d; ++j) sum[j] /= count;
        lr_centers_[static_cast<std::size_t>(c)] = std::move(sum);
    }
}

const ParamVec& Simulation::eval_model(std::size_t device) const {
    switch (opts_.strategy) {
    case StrategyKind::fedavg:
        return centers_[0];
    case StrategyKind::fedgroup:
    case StrategyKind::ifca:
        return centers_[static_cast<std::size_t>(assign_.cluster_of[device])];
    default: // personal-model strategies
        return models_[device];
    }
}

RoundMetrics Simulation::collect_metrics(
    const std::vector<std::size_t>& selected) {
    const std::size_t m = shards_.size();
    RoundMetrics out;
    out.round = round_;

    std::vector<double> acc(m, -1.0); // -1 marks devices with no test data
    parallel_for(m, [&](std::size_t i) {
        if (shards_[i].test.empty()) return;
        acc[i] = evaluate(eval_model(i), shards_[i].test).accuracy;
    });
    double sum = 0.0, sum2 = 0.0;
    std::size_t counted = 0;
    for (double a : acc) {
        if (a < 0.0) continue;
        sum += a;
        sum2 += a * a;
        ++counted;
    }
    if (counted > 0) {
        out.mean_acc = sum / static_cast<double>(counted);
        const double var =
            std::max(0.0, sum2 / static_cast<double>(counted) -
                              out.mean_acc * out.mean_acc);
        out.std_acc = std::sqrt(var);
    } else {
        out.mean_acc = std::nan("");
        out.std_acc = std::nan("");
    }

    const std::vector<int> truth = true_clusters();
    out.ari = truth.empty() ? std::nan("")
                            : adjusted_rand_index(assign_, truth);

    out.sim_flops = round_sim_flops_;
    const CommBytes cb = comm_bytes(
        opts_.strategy, selected.size(), static_cast<std::uint64_t>(k_eff_),
        arch_.total_dim(), arch_.phi_dim(), static_cast<std::uint64_t>(opts_.d),
        opts_.bytes_per_scalar);
    out.bytes_up = cb.up;
    out.bytes_down = cb.down;
    out.cluster_sizes = assign_.cluster_sizes();
    return out;
}

RoundMetrics Simulation::run_round() {
    ++round_;
    const std::vector<std::size_t> selected = sample_round_devices();
    local_update_phase(selected);
    update_assignment_phase(selected);
    aggregate_phase();
    return collect_metrics(selected);
}

} // namespace lcfed
