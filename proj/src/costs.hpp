#pragma once

#include <cstdint>
#include <string>

namespace lcfed {

enum class StrategyKind { fedavg, fedper, fesem, fedgroup, cgpfl, ifca, lcfed };

StrategyKind parse_strategy(const std::string& name);
const char* strategy_name(StrategyKind s);

// Per-round server-side similarity cost in flops for assigning m devices to
// k clusters over vectors of the given width. A cosine or negative-L2
// similarity over width-w vectors costs ~3w flops per (device, cluster)
// pair; lcfed additionally pays m*d to fold the m cached device sketches
// into low-rank cluster centers by averaging.
//
//   fedavg/fedper/ifca: 0 (no server-side similarity)
//   fesem/fedgroup/cgpfl: 3*m*k*dim
//   lcfed: 3*m*k*d + m*d
std::uint64_t similarity_flops(StrategyKind s, std::uint64_t m,
                               std::uint64_t k, std::uint64_t dim,
                               std::uint64_t d);

struct CommBytes {
    std::uint64_t up = 0;
    std::uint64_t down = 0;
};

// Per-round communication for m_selected participating devices.
// Uploads: the full model (dim scalars); lcfed devices also upload their
// d-dim sketch. Downloads: one center (dim) for single-center strategies,
// all k centers for ifca, and center plus global embedding (dim + dim_phi)
// for lcfed. Scalar width in bytes is a parameter.
CommBytes comm_bytes(StrategyKind s, std::uint64_t m_selected, std::uint64_t k,
                     std::uint64_t dim, std::uint64_t dim_phi, std::uint64_t d,
                     std::uint64_t bytes_per_scalar);

// Human-readable comparison table across all strategies at the given scale,
// plus the dim/d reduction factor.
std::string cost_report_text(std::uint64_t m, std::uint64_t k,
                             std::uint64_t dim, std::uint64_t dim_phi,
                             std::uint64_t d,
                             std::uint64_t bytes_per_scalar);

} // namespace lcfed
