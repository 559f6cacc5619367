#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"

namespace lcfed {

namespace {

constexpr std::uint64_t kTagData = 0x64617461ULL; // "data"

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

} // namespace

void ExperimentConfig::validate() const {
    if (strategies.empty()) throw ConfigError("strategies: list is empty");
    if (seeds.empty()) throw ConfigError("seeds: list is empty");
    if (m < 1) throw ConfigError("run.m: must be >= 1");
    if (k < 1) throw ConfigError("run.k: must be >= 1");
    if (d < 1) throw ConfigError("run.d: must be >= 1");
    if (rounds < 1) throw ConfigError("run.rounds: must be >= 1");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
        throw ConfigError("run.sample_fraction: must be in (0, 1]");
    if (offline_round < 1) throw ConfigError("run.offline_round: must be >= 1");
    if (warmup_devices < 0)
        throw ConfigError("run.warmup_devices: must be >= 0");
    if (bytes_per_scalar < 1)
        throw ConfigError("cost.bytes_per_scalar: must be >= 1");
    try {
        arch.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    try {
        hyper.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("train: ") + e.what());
    }
    if (source == DataSource::synthetic) {
        if (k_true < 1) throw ConfigError("data.k_true: must be >= 1");
        if (k_true > m) throw ConfigError("data.k_true: must be <= run.m");
        if (input_dim < 1) throw ConfigError("data.input_dim: must be >= 1");
        if (classes < 2) throw ConfigError("data.classes: must be >= 2");
        if (samples_per_device < 1)
            throw ConfigError("data.samples_per_device: must be >= 1");
        if (input_dim != arch.input_dim())
            throw ConfigError("data.input_dim: does not match model.layers");
        if (classes != arch.num_classes())
            throw ConfigError("data.classes: does not match model.layers");
    } else {
        if (images_path.empty()) throw ConfigError("data.images: missing path");
        if (labels_path.empty()) throw ConfigError("data.labels: missing path");
        if (partition.mode == PartitionMode::dirichlet &&
            !(partition.alpha > 0.0))
            throw ConfigError("partition.alpha: must be > 0");
        if (partition.mode == PartitionMode::pathological &&
            partition.labels_per_device < 1)
            throw ConfigError("partition.labels_per_device: must be >= 1");
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) +
                              ": empty key");

        if (key == "strategies") {
            cfg.strategies.clear();
            for (const auto& s : split_list(val))
                cfg.strategies.push_back(parse_strategy(s));
        } else if (key == "seeds") {
            cfg.seeds.clear();
            for (const auto& s : split_list(val))
                cfg.seeds.push_back(
                    static_cast<std::uint64_t>(parse_int(key, s)));
        } else if (key == "data.source") {
            if (val == "synthetic") cfg.source = DataSource::synthetic;
            else if (val == "idx") cfg.source = DataSource::idx_files;
            else
                throw ConfigError(
                    "data.source: expected synthetic or idx, got '" + val +
                    "'");
        } else if (key == "data.k_true") {
            cfg.k_true = static_cast<int>(parse_int(key, val));
        } else if (key == "data.input_dim") {
            cfg.input_dim = static_cast<int>(parse_int(key, val));
        } else if (key == "data.classes") {
            cfg.classes = static_cast<int>(parse_int(key, val));
        } else if (key == "data.samples_per_device") {
            cfg.samples_per_device = static_cast<int>(parse_int(key, val));
        } else if (key == "data.images") {
            cfg.images_path = val;
        } else if (key == "data.labels") {
            cfg.labels_path = val;
        } else if (key == "partition.mode") {
            if (val == "dirichlet") cfg.partition.mode = PartitionMode::dirichlet;
            else if (val == "pathological")
                cfg.partition.mode = PartitionMode::pathological;
            else
                throw ConfigError(
                    "partition.mode: expected dirichlet or pathological, "
                    "got '" + val + "'");
        } else if (key == "partition.alpha") {
            cfg.partition.alpha = parse_double(key, val);
        } else if (key == "partition.labels_per_device") {
            cfg.partition.labels_per_device =
                static_cast<int>(parse_int(key, val));
        } else if (key == "model.layers") {
            cfg.arch.layer_sizes.clear();
            for (const auto& s : split_list(val))
                cfg.arch.layer_sizes.push_back(
                    static_cast<int>(parse_int(key, s)));
        } else if (key == "model.split_layer") {
            cfg.arch.split_layer = static_cast<int>(parse_int(key, val));
        } else if (key == "train.eta") {
            cfg.hyper.eta = parse_double(key, val);
        } else if (key == "train.mu") {
            cfg.hyper.mu = parse_double(key, val);
        } else if (key == "train.lambda") {
            cfg.hyper.lambda = parse_double(key, val);
        } else if (key == "train.batch_size") {
            cfg.hyper.batch_size = static_cast<int>(parse_int(key, val));
        } else if (key == "train.local_steps") {
            cfg.hyper.local_steps = static_cast<int>(parse_int(key, val));
        } else if (key == "run.m") {
            cfg.m = static_cast<int>(parse_int(key, val));
        } else if (key == "run.k") {
            cfg.k = static_cast<int>(parse_int(key, val));
        } else if (key == "run.d") {
            cfg.d = static_cast<int>(parse_int(key, val));
        } else if (key == "run.rounds") {
            cfg.rounds = static_cast<int>(parse_int(key, val));
        } else if (key == "run.sample_fraction") {
            cfg.sample_fraction = parse_double(key, val);
        } else if (key == "run.offline_round") {
            cfg.offline_round = static_cast<int>(parse_int(key, val));
        } else if (key == "run.warmup_devices") {
            cfg.warmup_devices = static_cast<int>(parse_int(key, val));
        } else if (key == "cost.bytes_per_scalar") {
            cfg.bytes_per_scalar =
                static_cast<std::uint64_t>(parse_int(key, val));
        } else if (key == "out.dir") {
            cfg.out_dir = val;
        } else {
            throw ConfigError("unknown config key '" + key + "' (line " +
                              std::to_string(lineno) + ")");
        }
    }
    cfg.partition.m = cfg.m;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::vector<DeviceShard> build_shards(const ExperimentConfig& cfg,
                                      std::uint64_t seed) {
    const std::uint64_t data_seed = mix_seed({seed, kTagData});
    if (cfg.source == DataSource::synthetic)
        return make_synthetic_clusters(cfg.k_true, cfg.m, cfg.input_dim,
                                       cfg.classes, cfg.samples_per_device,
                                       data_seed);
    Examples all = load_idx_dataset(cfg.images_path, cfg.labels_path);
    if (all.feature_dim != static_cast<std::size_t>(cfg.arch.input_dim()))
        throw ConfigError(
            "model.layers: input width " +
            std::to_string(cfg.arch.input_dim()) +
            " does not match the image size " +
            std::to_string(all.feature_dim));
    PartitionSpec ps = cfg.partition;
    ps.m = cfg.m;
    ps.seed = data_seed;
    return ps.mode == PartitionMode::dirichlet ? dirichlet_partition(all, ps)
                                               : pathological_partition(all, ps);
}

SimOptions sim_options(const ExperimentConfig& cfg, StrategyKind strategy) {
    SimOptions o;
    o.strategy = strategy;
    o.k = cfg.k;
    o.d = cfg.d;
    o.sample_fraction = cfg.sample_fraction;
    o.offline_round = cfg.offline_round;
    o.warmup_devices = cfg.warmup_devices;
    o.bytes_per_scalar = cfg.bytes_per_scalar;
    o.hyper = cfg.hyper;
    return o;
}

} // namespace lcfed
