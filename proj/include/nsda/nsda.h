/*
 * nsda.h — C interface to the nsda library (continuous data assimilation for
 * the 2D periodic Navier-Stokes equations with stochastically noisy
 * observations).
 *
 * All objects are opaque handles; every function returns an nsda_status and
 * leaves a thread-local message retrievable via nsda_last_error() on failure.
 * Strings returned through `char**` outputs are owned by the caller and must
 * be released with nsda_string_free(); strings returned as `const char*` are
 * owned by the handle they came from.
 */

#ifndef NSDA_H
#define NSDA_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nsda_status {
    NSDA_OK = 0,
    NSDA_ERR_INVALID_ARGUMENT = 1,
    NSDA_ERR_IO = 2,
    NSDA_ERR_RUNTIME = 3,
    NSDA_ERR_CHECKS_FAILED = 4  /* run completed; requested checks failed */
} nsda_status;

typedef struct nsda_config nsda_config;
typedef struct nsda_result nsda_result;

const char* nsda_version(void);

/* Message describing the most recent failure on this thread. */
const char* nsda_last_error(void);

/* Configuration lifecycle. */
nsda_status nsda_config_create(nsda_config** out);
nsda_status nsda_config_from_file(const char* path, nsda_config** out);
nsda_status nsda_config_from_string(const char* text, nsda_config** out);
nsda_status nsda_config_set(nsda_config* cfg, const char* dotted_key,
                            const char* value);
nsda_status nsda_config_serialize(const nsda_config* cfg, char** out_text);
void nsda_config_destroy(nsda_config* cfg);

/*
 * Executes one run.
 *   mode:   "reference" | "assimilate" | "ensemble" | "verify" | "calibrate"
 *   out_dir: directory for artifacts (manifest.json, series.csv, report.json,
 *            observations.csv depending on mode)
 *   replay_path: observation-log CSV for assimilate mode, or NULL
 *   seed_override: >= 0 replaces the harness seed
 *   members_override: > 0 replaces the ensemble size
 *   bound_override: bound mode name, or NULL
 *   epsilon_override: > 0 replaces epsilon
 *
 * Returns NSDA_OK when the run completed and all requested checks passed,
 * NSDA_ERR_CHECKS_FAILED when it completed but a bound/property check failed
 * (a result handle is still produced), other codes on error.
 */
nsda_status nsda_run(const nsda_config* cfg, const char* mode,
                     const char* out_dir, const char* replay_path,
                     int64_t seed_override, int members_override,
                     const char* bound_override, double epsilon_override,
                     nsda_result** out);

int nsda_result_checks_passed(const nsda_result* res);
const char* nsda_result_report_json(const nsda_result* res);
const char* nsda_result_manifest_path(const nsda_result* res);
const char* nsda_result_series_path(const nsda_result* res);
const char* nsda_result_report_path(const nsda_result* res);
const char* nsda_result_obslog_path(const nsda_result* res);
void nsda_result_destroy(nsda_result* res);

void nsda_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* NSDA_H */
