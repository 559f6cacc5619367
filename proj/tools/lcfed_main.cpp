#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "lcfed/lcfed.h"

namespace {

int exit_code_for(lcfed_status s) {
    switch (s) {
    case LCFED_OK: return 0;
    case LCFED_ERR_INVALID_ARG:
    case LCFED_ERR_FORMAT: return 1;
    case LCFED_ERR_NUMERIC: return 2;
    case LCFED_ERR_IO: return 3;
    default: return 4;
    }
}

int fail(lcfed_status s) {
    std::fprintf(stderr, "error (%s): %s\n", lcfed_status_name(s),
                 lcfed_last_error());
    return exit_code_for(s);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"clustered federated learning simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "run the experiment in a config file");
    run->add_option("--config", config_path, "config file path")->required();
    run->add_option("--out", out_dir, "output directory (overrides out.dir)");

    std::int32_t m = 100, k = 10, d = 50;
    std::uint64_t dim = 4'800'000;
    std::uint64_t dim_phi = 0;
    std::int32_t bytes_per_scalar = 4;
    auto* cost = app.add_subcommand(
        "cost-report", "print the per-round clustering cost comparison");
    cost->add_option("--m", m, "device count")->check(CLI::PositiveNumber);
    cost->add_option("--k", k, "cluster count")->check(CLI::PositiveNumber);
    cost->add_option("--dim", dim, "full model parameter count")
        ->check(CLI::PositiveNumber);
    cost->add_option("--d", d, "low-rank width")->check(CLI::PositiveNumber);
    cost->add_option("--dim-phi", dim_phi,
                     "embedding parameter count (default dim/2)");
    cost->add_option("--bytes", bytes_per_scalar, "bytes per scalar on the wire")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        lcfed_config* cfg = nullptr;
        lcfed_status s = lcfed_config_load(config_path.c_str(), &cfg);
        if (s != LCFED_OK) return fail(s);
        s = lcfed_run_experiment(cfg, out_dir.empty() ? nullptr
                                                      : out_dir.c_str());
        lcfed_config_free(cfg);
        if (s != LCFED_OK) return fail(s);
        return 0;
    }

    if (dim_phi == 0) dim_phi = dim / 2;
    char* text = nullptr;
    const lcfed_status s =
        lcfed_cost_report(m, k, dim, dim_phi, d, bytes_per_scalar, &text);
    if (s != LCFED_OK) return fail(s);
    std::fputs(text, stdout);
    lcfed_string_free(text);
    return 0;
}
