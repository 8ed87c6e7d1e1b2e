/* gridfdd — fault detection, diagnosis, and fault-tolerant control for a
 * grid-connected inverter, as a shared library.
 *
 * The API mirrors the pipeline commands: build a configuration (defaults,
 * file, or key overrides), then run simulate / gen-dataset / train / eval /
 * run-ftc / plot against it. Artifacts land in the configured output
 * directory. All functions return GFDD_OK on success; on failure
 * gfdd_last_error() describes what went wrong. Handles are opaque and must
 * be released with gfdd_config_destroy().
 *
 * Thread safety: a config handle may not be used from two threads at once;
 * error/summary strings are per-thread.
 */

#ifndef GRIDFDD_H
#define GRIDFDD_H

#include <stddef.h>

#if defined(_WIN32)
#define GFDD_API __declspec(dllexport)
#else
#define GFDD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct gfdd_config gfdd_config;

typedef enum gfdd_status {
    GFDD_OK = 0,
    GFDD_ERR_INVALID_ARG = 1, /* null handle / bad argument */
    GFDD_ERR_CONFIG = 2,      /* bad configuration value or key */
    GFDD_ERR_IO = 3,          /* missing or malformed file */
    GFDD_ERR_NUMERIC = 4,     /* non-finite values, divergence */
    GFDD_ERR_CONTRACT = 5,    /* precondition violated */
    GFDD_ERR_INTERNAL = 6
} gfdd_status;

GFDD_API const char* gfdd_version(void);

/* Configuration ----------------------------------------------------------- */

/* A config preloaded with the built-in defaults. NULL on allocation failure. */
GFDD_API gfdd_config* gfdd_config_create(void);
GFDD_API void gfdd_config_destroy(gfdd_config* cfg);

/* Merge a config file (sections of key = value pairs) into cfg. */
GFDD_API gfdd_status gfdd_config_load(gfdd_config* cfg, const char* path);

/* Set one key, addressed as "section.key" (e.g. "run.seed", "circuit.r1"). */
GFDD_API gfdd_status gfdd_config_set(gfdd_config* cfg, const char* key, const char* value);

/* Copy the value of a key into buf (NUL-terminated, truncated if needed).
 * Fails with GFDD_ERR_CONFIG when the key was never set. */
GFDD_API gfdd_status gfdd_config_get(const gfdd_config* cfg, const char* key, char* buf,
                                     size_t buflen);

/* Commands ----------------------------------------------------------------- */

GFDD_API gfdd_status gfdd_simulate(gfdd_config* cfg);
GFDD_API gfdd_status gfdd_gen_dataset(gfdd_config* cfg);
/* which: "lstm", "knn", or "mlp" */
GFDD_API gfdd_status gfdd_train(gfdd_config* cfg, const char* which);
GFDD_API gfdd_status gfdd_eval(gfdd_config* cfg);
GFDD_API gfdd_status gfdd_run_ftc(gfdd_config* cfg);
/* trace_csv may be NULL for the default closed-loop trace; pass t0 < 0 to
 * plot the first fault window. */
GFDD_API gfdd_status gfdd_plot(gfdd_config* cfg, const char* trace_csv, double t0, double t1);

/* Diagnostics -------------------------------------------------------------- */

/* Message of the latest failure on this thread ("" when none). */
GFDD_API const char* gfdd_last_error(void);

/* One-line summary of the latest successful command on this thread. */
GFDD_API const char* gfdd_last_summary(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GRIDFDD_H */
