#pragma once

#include <span>
#include <vector>

#include "dataset.hpp"
#include "model.hpp"

namespace lcfed {

// Offline-fitted linear map into the low-rank model space: D orthonormal
// rows, each of full parameter length. Projection is D inner products.
struct RankProjector {
    std::size_t input_dim = 0;
    int d = 0;
    std::vector<double> rows;      // row-major d x input_dim
    std::vector<int> fitted_from;  // device ids of the fitting subset
    bool rank_deficient = false;   // padded with arbitrary orthonormal rows

    std::span<const double> row(int i) const {
        return {rows.data() + static_cast<std::size_t>(i) * input_dim, input_dim};
    }
};

// Top-d right singular vectors of the uncentered stacked model matrix,
// singular values descending, each row sign-fixed so its largest-magnitude
// entry is positive. If the stack has rank < d the remaining rows are an
// arbitrary orthonormal complement and rank_deficient is set (a note goes
// to stderr).
RankProjector fit_projector(const std::vector<ParamVec>& models, int d,
                            std::vector<int> fitted_from = {});

std::vector<double> project(const RankProjector& proj, std::span<const double> w);

inline std::vector<double> project(const RankProjector& proj, const ParamVec& w) {
    return project(proj, std::span<const double>(w.values));
}

// <a,b>/(|a||b|); a zero vector is treated as similarity 0 (a one-time
// warning goes to stderr).
double cosine_sim(std::span<const double> a, std::span<const double> b);

// -|a-b|_2
double neg_l2_sim(std::span<const double> a, std::span<const double> b);

// Devices-to-clusters map: exactly one cluster per device.
struct Assignment {
    int num_clusters = 1;
    std::vector<int> cluster_of; // one entry per device

    std::size_t device_count() const { return cluster_of.size(); }
    std::vector<int> cluster_sizes() const;
};

// Row-wise argmax of an m x K similarity matrix, ties toward the lowest
// cluster index.
Assignment update_assignments(const std::vector<std::vector<double>>& sim);

// Cluster whose center has the lowest mean training loss on the shard,
// ties toward the lowest index.
int ifca_assign(const Examples& train, const std::vector<ParamVec>& centers);

// Chance-corrected agreement between an assignment and ground-truth ids;
// 1.0 iff the partitions are identical up to relabeling.
double adjusted_rand_index(const Assignment& assign, std::span<const int> truth);

} // namespace lcfed
