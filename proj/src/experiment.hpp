#pragma once

#include <string>

#include "config.hpp"

namespace lcfed {

// One CSV of per-round metrics per (strategy, seed) at
// <out_dir>/<strategy>_seed<seed>.csv, plus <out_dir>/summary.json with
// across-seed statistics of the final round. Deterministic byte-for-byte
// for a fixed config.
void run_experiment(const ExperimentConfig& cfg);

// CSV schema, one definition shared by writer and tests.
extern const char* const kCsvHeader;

std::string format_metrics_row(StrategyKind strategy, std::uint64_t seed,
                               const RoundMetrics& mt);

} // namespace lcfed
