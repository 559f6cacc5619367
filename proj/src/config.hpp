#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "costs.hpp"
#include "data_synth.hpp"
#include "model.hpp"
#include "server.hpp"

namespace lcfed {

enum class DataSource { synthetic, idx_files };

struct ExperimentConfig {
    std::vector<StrategyKind> strategies = {StrategyKind::lcfed};
    std::vector<std::uint64_t> seeds = {1};

    DataSource source = DataSource::synthetic;
    // synthetic task
    int k_true = 4;
    int input_dim = 16;
    int classes = 4;
    int samples_per_device = 200;
    // idx task
    std::string images_path;
    std::string labels_path;
    PartitionSpec partition; // partition.m mirrors run.m; seed derived per run

    ModelArch arch{{16, 32, 4}, 1};
    TrainHyper hyper;

    int m = 100;
    int k = 10;
    int d = 50;
    int rounds = 30;
    double sample_fraction = 1.0;
    int offline_round = 1;
    int warmup_devices = 0; // 0 = auto
    std::uint64_t bytes_per_scalar = 4;
    std::string out_dir = "out";

    void validate() const; // throws ConfigError naming the offending field
};

// Flat dotted-key config text, one `key=value` per line; '#' starts a
// comment; blank lines ignored. Unknown keys are errors (the message names
// the key). Lists (seeds, strategies, model.layers) are comma-separated.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Shards for one run: synthetic generation or IDX load + partition, fully
// determined by (config, seed).
std::vector<DeviceShard> build_shards(const ExperimentConfig& cfg,
                                      std::uint64_t seed);

SimOptions sim_options(const ExperimentConfig& cfg, StrategyKind strategy);

} // namespace lcfed
