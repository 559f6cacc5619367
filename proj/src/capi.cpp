#include "lcfed/lcfed.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "config.hpp"
#include "costs.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "server.hpp"

struct lcfed_config {
    lcfed::ExperimentConfig cfg;
};

struct lcfed_sim {
    lcfed::Simulation sim;
};

namespace {

thread_local std::string g_last_error;

template <typename F> lcfed_status guard(F&& f) noexcept {
    try {
        f();
        g_last_error.clear();
        return LCFED_OK;
    } catch (const lcfed::ConfigError& e) {
        g_last_error = e.what();
        return LCFED_ERR_INVALID_ARG;
    } catch (const lcfed::FormatError& e) {
        g_last_error = e.what();
        return LCFED_ERR_FORMAT;
    } catch (const lcfed::IoError& e) {
        g_last_error = e.what();
        return LCFED_ERR_IO;
    } catch (const lcfed::NumericError& e) {
        g_last_error = e.what();
        return LCFED_ERR_NUMERIC;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return LCFED_ERR_INVALID_ARG;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LCFED_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return LCFED_ERR_INTERNAL;
    }
}

lcfed_status invalid(const char* msg) noexcept {
    g_last_error = msg;
    return LCFED_ERR_INVALID_ARG;
}

} // namespace

extern "C" {

const char* lcfed_status_name(lcfed_status s) {
    switch (s) {
    case LCFED_OK: return "ok";
    case LCFED_ERR_INVALID_ARG: return "invalid_arg";
    case LCFED_ERR_IO: return "io";
    case LCFED_ERR_FORMAT: return "format";
    case LCFED_ERR_NUMERIC: return "numeric";
    case LCFED_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* lcfed_last_error(void) { return g_last_error.c_str(); }

lcfed_status lcfed_config_load(const char* path, lcfed_config** out) {
    if (!path || !out) return invalid("lcfed_config_load: null argument");
    *out = nullptr;
    return guard([&] {
        auto* c = new lcfed_config{lcfed::load_config_file(path)};
        *out = c;
    });
}

lcfed_status lcfed_config_parse(const char* text, lcfed_config** out) {
    if (!text || !out) return invalid("lcfed_config_parse: null argument");
    *out = nullptr;
    return guard([&] {
        auto* c = new lcfed_config{lcfed::parse_config_text(text)};
        *out = c;
    });
}

void lcfed_config_free(lcfed_config* cfg) { delete cfg; }

lcfed_status lcfed_run_experiment(const lcfed_config* cfg,
                                  const char* out_dir) {
    if (!cfg) return invalid("lcfed_run_experiment: null config");
    return guard([&] {
        lcfed::ExperimentConfig c = cfg->cfg;
        if (out_dir && *out_dir) c.out_dir = out_dir;
        lcfed::run_experiment(c);
    });
}

lcfed_status lcfed_sim_create(const lcfed_config* cfg, const char* strategy,
                              uint64_t seed, lcfed_sim** out) {
    if (!cfg || !strategy || !out)
        return invalid("lcfed_sim_create: null argument");
    *out = nullptr;
    return guard([&] {
        const lcfed::StrategyKind s = lcfed::parse_strategy(strategy);
        auto shards = lcfed::build_shards(cfg->cfg, seed);
        *out = new lcfed_sim{lcfed::Simulation(
            cfg->cfg.arch, std::move(shards),
            lcfed::sim_options(cfg->cfg, s), seed)};
    });
}

void lcfed_sim_free(lcfed_sim* sim) { delete sim; }

lcfed_status lcfed_sim_run_round(lcfed_sim* sim, lcfed_round_metrics* out) {
    if (!sim) return invalid("lcfed_sim_run_round: null simulation");
    return guard([&] {
        const lcfed::RoundMetrics mt = sim->sim.run_round();
        if (out) {
            out->round = mt.round;
            out->mean_acc = mt.mean_acc;
            out->std_acc = mt.std_acc;
            out->ari = mt.ari;
            out->sim_flops = mt.sim_flops;
            out->bytes_up = mt.bytes_up;
            out->bytes_down = mt.bytes_down;
        }
    });
}

int32_t lcfed_sim_device_count(const lcfed_sim* sim) {
    return sim ? sim->sim.device_count() : 0;
}

int32_t lcfed_sim_cluster_count(const lcfed_sim* sim) {
    return sim ? sim->sim.cluster_count() : 0;
}

lcfed_status lcfed_sim_assignments(const lcfed_sim* sim, int32_t* buf,
                                   size_t cap) {
    if (!sim || !buf) return invalid("lcfed_sim_assignments: null argument");
    const auto& a = sim->sim.assignment().cluster_of;
    if (cap < a.size())
        return invalid("lcfed_sim_assignments: buffer too small");
    for (size_t i = 0; i < a.size(); ++i) buf[i] = a[i];
    return LCFED_OK;
}

lcfed_status lcfed_sim_cluster_sizes(const lcfed_sim* sim, int32_t* buf,
                                     size_t cap) {
    if (!sim || !buf) return invalid("lcfed_sim_cluster_sizes: null argument");
    const auto sizes = sim->sim.assignment().cluster_sizes();
    if (cap < sizes.size())
        return invalid("lcfed_sim_cluster_sizes: buffer too small");
    for (size_t i = 0; i < sizes.size(); ++i) buf[i] = sizes[i];
    return LCFED_OK;
}

lcfed_status lcfed_similarity_flops(const char* strategy, int32_t m, int32_t k,
                                    uint64_t dim, int32_t d, uint64_t* out) {
    if (!strategy || !out)
        return invalid("lcfed_similarity_flops: null argument");
    if (m < 1 || k < 1 || dim < 1 || d < 1)
        return invalid("lcfed_similarity_flops: all sizes must be positive");
    return guard([&] {
        *out = lcfed::similarity_flops(
            lcfed::parse_strategy(strategy), static_cast<uint64_t>(m),
            static_cast<uint64_t>(k), dim, static_cast<uint64_t>(d));
    });
}

lcfed_status lcfed_comm_bytes(const char* strategy, int32_t m_selected,
                              int32_t k, uint64_t dim, uint64_t dim_phi,
                              int32_t d, int32_t bytes_per_scalar,
                              uint64_t* out_up, uint64_t* out_down) {
    if (!strategy || !out_up || !out_down)
        return invalid("lcfed_comm_bytes: null argument");
    if (m_selected < 1 || k < 1 || dim < 1 || d < 1 || bytes_per_scalar < 1)
        return invalid("lcfed_comm_bytes: all sizes must be positive");
    return guard([&] {
        const lcfed::CommBytes cb = lcfed::comm_bytes(
            lcfed::parse_strategy(strategy),
            static_cast<uint64_t>(m_selected), static_cast<uint64_t>(k), dim,
            dim_phi, static_cast<uint64_t>(d),
            static_cast<uint64_t>(bytes_per_scalar));
        *out_up = cb.up;
        *out_down = cb.down;
    });
}

lcfed_status lcfed_cost_report(int32_t m, int32_t k, uint64_t dim,
                               uint64_t dim_phi, int32_t d,
                               int32_t bytes_per_scalar, char** out_text) {
    if (!out_text) return invalid("lcfed_cost_report: null out_text");
    if (m < 1 || k < 1 || dim < 1 || d < 1 || bytes_per_scalar < 1)
        return invalid("lcfed_cost_report: all sizes must be positive");
    *out_text = nullptr;
    return guard([&] {
        const std::string text = lcfed::cost_report_text(
            static_cast<uint64_t>(m), static_cast<uint64_t>(k), dim, dim_phi,
            static_cast<uint64_t>(d), static_cast<uint64_t>(bytes_per_scalar));
        char* s = static_cast<char*>(std::malloc(text.size() + 1));
        if (!s) throw std::bad_alloc();
        std::memcpy(s, text.c_str(), text.size() + 1);
        *out_text = s;
    });
}

void lcfed_string_free(char* s) { std::free(s); }

} // extern "C"
