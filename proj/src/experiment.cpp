#include "experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "errors.hpp"

namespace lcfed {

const char* const kCsvHeader = "round,strategy,seed,mean_acc,std_acc,ari,"
                               "sim_flops,bytes_up,bytes_down,cluster_sizes";

namespace {

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

std::string format_metrics_row(StrategyKind strategy, std::uint64_t seed,
                               const RoundMetrics& mt) {
    std::string row = std::to_string(mt.round);
    row += ',';
    row += strategy_name(strategy);
    row += ',';
    row += std::to_string(seed);
    row += ',';
    row += fmt_double(mt.mean_acc);
    row += ',';
    row += fmt_double(mt.std_acc);
    row += ',';
    row += fmt_double(mt.ari);
    row += ',';
    row += std::to_string(mt.sim_flops);
    row += ',';
    row += std::to_string(mt.bytes_up);
    row += ',';
    row += std::to_string(mt.bytes_down);
    row += ",\"";
    for (std::size_t i = 0; i < mt.cluster_sizes.size(); ++i) {
        if (i) row += ';';
        row += std::to_string(mt.cluster_sizes[i]);
    }
    row += '"';
    return row;
}

void run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + cfg.out_dir + ": " +
                      ec.message());

    nlohmann::ordered_json summary;
    summary["strategies"] = nlohmann::ordered_json::object();

    for (StrategyKind strategy : cfg.strategies) {
        nlohmann::ordered_json per_seed = nlohmann::ordered_json::array();
        double acc_sum = 0.0, acc_sum2 = 0.0;
        double ari_sum = 0.0;
        int ari_count = 0;

        for (std::uint64_t seed : cfg.seeds) {
            std::vector<DeviceShard> shards = build_shards(cfg, seed);
            Simulation sim(cfg.arch, std::move(shards),
                           sim_options(cfg, strategy), seed);

            const fs::path csv_path =
                fs::path(cfg.out_dir) /
                (std::string(strategy_name(strategy)) + "_seed" +
                 std::to_string(seed) + ".csv");
            std::ofstream csv(csv_path, std::ios::binary);
            if (!csv) throw IoError("cannot write " + csv_path.string());
            csv << kCsvHeader << '\n';

            RoundMetrics last;
            for (int r = 0; r < cfg.rounds; ++r) {
                last = sim.run_round();
                csv << format_metrics_row(strategy, seed, last) << '\n';
            }
            csv.flush();
            if (!csv) throw IoError("failed writing " + csv_path.string());

            acc_sum += last.mean_acc;
            acc_sum2 += last.mean_acc * last.mean_acc;
            if (!std::isnan(last.ari)) {
                ari_sum += last.ari;
                ++ari_count;
            }
            nlohmann::ordered_json row;
            row["seed"] = seed;
            row["final_mean_acc"] = last.mean_acc;
            row["final_std_acc"] = last.std_acc;
            row["final_ari"] = last.ari;
            per_seed.push_back(std::move(row));
        }

        const auto n = static_cast<double>(cfg.seeds.size());
        const double mean = acc_sum / n;
        const double var = std::max(0.0, acc_sum2 / n - mean * mean);
        nlohmann::ordered_json entry;
        entry["final_mean_acc"] = {{"mean", mean},
                                   {"std", std::sqrt(var)}};
        if (ari_count > 0)
            entry["final_ari"] = {{"mean", ari_sum / ari_count}};
        else
            entry["final_ari"] = nullptr;
        entry["per_seed"] = std::move(per_seed);
        summary["strategies"][strategy_name(strategy)] = std::move(entry);
    }

    const fs::path summary_path = fs::path(cfg.out_dir) / "summary.json";
    std::ofstream js(summary_path, std::ios::binary);
    if (!js) throw IoError("cannot write " + summary_path.string());
    js << summary.dump(2) << '\n';
    js.flush();
    if (!js) throw IoError("failed writing " + summary_path.string());
}

} // namespace lcfed
