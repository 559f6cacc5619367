#ifndef LCFED_H
#define LCFED_H

/* lcfed — clustered federated learning simulator.
 *
 * C interface to the simulation core. All functions return a status code;
 * on any failure the per-thread message from lcfed_last_error() describes
 * what went wrong. Handles are opaque and must be released with the
 * matching *_free function.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LCFED_API __declspec(dllexport)
#else
#define LCFED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lcfed_status {
    LCFED_OK = 0,
    LCFED_ERR_INVALID_ARG = 1, /* bad parameter or malformed config */
    LCFED_ERR_IO = 2,          /* file could not be read or written */
    LCFED_ERR_FORMAT = 3,      /* malformed input file (e.g. IDX) */
    LCFED_ERR_NUMERIC = 4,     /* training diverged to non-finite values */
    LCFED_ERR_INTERNAL = 5
} lcfed_status;

typedef struct lcfed_config lcfed_config; /* parsed experiment configuration */
typedef struct lcfed_sim lcfed_sim;       /* one running simulation */

/* Per-round statistics. `ari` is NaN when the dataset carries no
 * ground-truth cluster labels. */
typedef struct lcfed_round_metrics {
    int32_t round;
    double mean_acc;
    double std_acc;
    double ari;
    uint64_t sim_flops;
    uint64_t bytes_up;
    uint64_t bytes_down;
} lcfed_round_metrics;

LCFED_API const char* lcfed_status_name(lcfed_status s);

/* Message for the most recent failure on the calling thread. Never NULL. */
LCFED_API const char* lcfed_last_error(void);

/* --- configuration ------------------------------------------------------ */

/* Config files are flat `key = value` lines with dotted keys
 * (e.g. train.eta=0.01); `#` starts a comment. See the project README for
 * the full key reference. */
LCFED_API lcfed_status lcfed_config_load(const char* path, lcfed_config** out);
LCFED_API lcfed_status lcfed_config_parse(const char* text, lcfed_config** out);
LCFED_API void lcfed_config_free(lcfed_config* cfg);

/* --- experiments -------------------------------------------------------- */

/* Runs every (strategy, seed) pair from the config. Writes one CSV of
 * round metrics per pair plus summary.json into out_dir (falls back to
 * the config's out.dir key, then "out"). */
LCFED_API lcfed_status lcfed_run_experiment(const lcfed_config* cfg,
                                            const char* out_dir);

/* --- single simulation, stepped round by round --------------------------- */

LCFED_API lcfed_status lcfed_sim_create(const lcfed_config* cfg,
                                        const char* strategy, uint64_t seed,
                                        lcfed_sim** out);
LCFED_API void lcfed_sim_free(lcfed_sim* sim);
LCFED_API lcfed_status lcfed_sim_run_round(lcfed_sim* sim,
                                           lcfed_round_metrics* out);
LCFED_API int32_t lcfed_sim_device_count(const lcfed_sim* sim);
LCFED_API int32_t lcfed_sim_cluster_count(const lcfed_sim* sim);
/* Cluster index per device; buf must hold device_count entries. */
LCFED_API lcfed_status lcfed_sim_assignments(const lcfed_sim* sim, int32_t* buf,
                                             size_t cap);
/* Device count per cluster; buf must hold cluster_count entries. */
LCFED_API lcfed_status lcfed_sim_cluster_sizes(const lcfed_sim* sim,
                                               int32_t* buf, size_t cap);

/* --- clustering cost model ----------------------------------------------- */

/* Server-side similarity FLOPs for one round of online clustering. */
LCFED_API lcfed_status lcfed_similarity_flops(const char* strategy, int32_t m,
                                              int32_t k, uint64_t dim,
                                              int32_t d, uint64_t* out);

/* Per-round communication volume in bytes for m_selected participants. */
LCFED_API lcfed_status lcfed_comm_bytes(const char* strategy,
                                        int32_t m_selected, int32_t k,
                                        uint64_t dim, uint64_t dim_phi,
                                        int32_t d, int32_t bytes_per_scalar,
                                        uint64_t* out_up, uint64_t* out_down);

/* Formatted per-strategy cost table for one (m, K, dim, dim_phi, D) scale.
 * *out_text is heap-allocated; release it with lcfed_string_free. */
LCFED_API lcfed_status lcfed_cost_report(int32_t m, int32_t k, uint64_t dim,
                                         uint64_t dim_phi, int32_t d,
                                         int32_t bytes_per_scalar,
                                         char** out_text);

LCFED_API void lcfed_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* LCFED_H */
