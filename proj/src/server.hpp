#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "clustering.hpp"
#include "costs.hpp"
#include "dataset.hpp"
#include "model.hpp"
#include "trainer.hpp"

namespace lcfed {

// Substream seed for device `device`'s local update in round `round`;
// independent of thread schedule and selection order.
std::uint64_t device_round_seed(std::uint64_t seed, int round, int device);

// Mean of the phi blocks over all models (the global embedding anchor).
std::vector<double> aggregate_global_embedding(
    const std::vector<ParamVec>& models);

// Per-cluster unweighted mean of member models; a cluster with no members
// keeps its previous center.
std::vector<ParamVec> aggregate_cluster_centers(
    const std::vector<ParamVec>& models, const Assignment& assign,
    const std::vector<ParamVec>& previous);

struct RoundMetrics {
    int round = 0;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    double ari = 0.0; // NaN when no ground-truth clustering exists
    std::uint64_t sim_flops = 0;
    std::uint64_t bytes_up = 0;
    std::uint64_t bytes_down = 0;
    std::vector<int> cluster_sizes;
};

struct SimOptions {
    StrategyKind strategy = StrategyKind::lcfed;
    int k = 10;                  // cluster budget (forced to 1 for fedavg/fedper)
    int d = 50;                  // low-rank width (lcfed)
    double sample_fraction = 1.0;
    int offline_round = 1;       // fedgroup's one-shot clustering round
    int warmup_devices = 0;      // |S_d|; 0 → max(ceil(m/5), 3k, d for lcfed)
    std::uint64_t bytes_per_scalar = 4;
    TrainHyper hyper;
};

// One (strategy, seed) simulation over a fixed set of device shards.
// Deterministic: every random draw comes from substreams of (seed, purpose,
// round, device), so results do not depend on thread schedule.
class Simulation {
  public:
    Simulation(ModelArch arch, std::vector<DeviceShard> shards,
               SimOptions opts, std::uint64_t seed);

    RoundMetrics run_round();

    int device_count() const { return static_cast<int>(shards_.size()); }
    int cluster_count() const { return k_eff_; }
    int current_round() const { return round_; }
    const Assignment& assignment() const { return assign_; }
    const std::vector<ParamVec>& device_models() const { return models_; }
    const std::vector<ParamVec>& centers() const { return centers_; }
    const RankProjector* projector() const {
        return projector_ ? &*projector_ : nullptr;
    }

    // Ground-truth labels when every shard carries one; empty otherwise.
    std::vector<int> true_clusters() const;

  private:
    std::vector<std::size_t> sample_round_devices();
    void local_update_phase(const std::vector<std::size_t>& selected);
    void update_assignment_phase(const std::vector<std::size_t>& selected);
    void aggregate_phase();
    RoundMetrics collect_metrics(const std::vector<std::size_t>& selected);
    const ParamVec& eval_model(std::size_t device) const;

    ModelArch arch_;
    std::vector<DeviceShard> shards_;
    SimOptions opts_;
    std::uint64_t seed_ = 0;
    int k_eff_ = 1;
    int round_ = 0; // rounds completed

    std::vector<ParamVec> models_;
    std::vector<ParamVec> centers_;
    std::vector<double> global_phi_;
    Assignment assign_;
    std::optional<RankProjector> projector_;
    std::vector<std::vector<double>> lr_cache_;   // per-device sketches
    std::vector<std::vector<double>> lr_centers_; // per-cluster sketches
    std::vector<int> ifca_choice_;
    bool fedgroup_clustered_ = false;
    std::uint64_t round_sim_flops_ = 0;
};

} // namespace lcfed
