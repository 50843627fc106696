#ifndef DATAPLANE_SIM_H
#define DATAPLANE_SIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DpsStatus {
  DPS_STATUS_OK = 0,
  DPS_STATUS_NULL_POINTER = 1,
  DPS_STATUS_INVALID_UTF8 = 2,
  DPS_STATUS_PARSE = 3,
  DPS_STATUS_INVALID_SCENARIO = 4,
  DPS_STATUS_DOMAIN = 5,
  DPS_STATUS_IO = 6,
  DPS_STATUS_UNKNOWN_SCHEME = 7,
  DPS_STATUS_INTERNAL = 8,
  DPS_STATUS_PANIC = 9,
} DpsStatus;

/**
 * Opaque handle to a finished run and its summary.
 */
typedef struct DpsRunResult DpsRunResult;

/**
 * Opaque scenario handle.
 */
typedef struct DpsScenario DpsScenario;

/**
 * Request accounting of a finished run.
 */
typedef struct DpsCounts {
  uint64_t generated;
  uint64_t completed;
  uint64_t dropped;
  uint64_t residual;
  uint64_t epochs_run;
  /**
   * Non-zero when the drain cap stopped the run early.
   */
  uint8_t truncated;
} DpsCounts;

/**
 * Load of one server as seen by an assignment decision.
 */
typedef struct DpsLoad {
  uint64_t queue_len;
  double headroom;
  double capacity;
} DpsLoad;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *dps_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread. Do not free.
 */
const char *dps_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a pointer obtained from this library that has not been freed.
 */
void dps_string_free(char *s);

/**
 * Creates a handle holding the bundled five-pair scenario.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum DpsStatus dps_scenario_default(struct DpsScenario **out);

/**
 * Creates a handle holding the bundled pair-count sweep scenario.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum DpsStatus dps_scenario_capex(struct DpsScenario **out);

/**
 * Parses a scenario from TOML text. The scenario is not validated here.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum DpsStatus dps_scenario_from_toml(const char *toml, struct DpsScenario **out);

/**
 * Loads a scenario from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DpsStatus dps_scenario_from_file(const char *path, struct DpsScenario **out);

/**
 * Serializes a scenario back to TOML.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum DpsStatus dps_scenario_to_toml(const struct DpsScenario *scenario, char **out);

/**
 * # Safety
 * `scenario` must be a live handle.
 */
enum DpsStatus dps_scenario_set_seed(struct DpsScenario *scenario, uint64_t seed);

/**
 * Sets the assignment scheme by name (e.g. `"baseline"`, `"bestfit-upf-mec"`).
 *
 * # Safety
 * `scenario` must be a live handle; `name` a NUL-terminated string.
 */
enum DpsStatus dps_scenario_set_scheme(struct DpsScenario *scenario, const char *name);

/**
 * Sets the mean number of arrivals per epoch.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum DpsStatus dps_scenario_set_arrival_rate(struct DpsScenario *scenario, double per_epoch);

/**
 * Resizes the topology to `pairs` co-located UPF-MEC pairs.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum DpsStatus dps_scenario_set_pairs(struct DpsScenario *scenario, size_t pairs);

/**
 * Checks every scenario invariant. Returns `DPS_STATUS_OK` when valid and
 * `DPS_STATUS_INVALID_SCENARIO` otherwise. When `report_json` is non-NULL it
 * receives the list of violations as JSON in both cases.
 *
 * # Safety
 * `scenario` must be a live handle; `report_json` NULL or writable.
 */
enum DpsStatus dps_scenario_validate(const struct DpsScenario *scenario, char **report_json);

/**
 * # Safety
 * `scenario` must be NULL or a live handle, not used afterwards.
 */
void dps_scenario_free(struct DpsScenario *scenario);

/**
 * Validates and runs a scenario to completion.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum DpsStatus dps_run(const struct DpsScenario *scenario, struct DpsRunResult **out);

/**
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum DpsStatus dps_run_counts(const struct DpsRunResult *result, struct DpsCounts *out);

/**
 * Summary report (per-UPF/MEC delays, percentiles, threshold compliance) as JSON.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum DpsStatus dps_run_summary_json(const struct DpsRunResult *result, char **out);

/**
 * Nearest-rank percentile `p` (0, 100] of the end-to-end delay of completed
 * requests, in ms. Fails with `DPS_STATUS_DOMAIN` when nothing completed or `p` is
 * out of range.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum DpsStatus dps_run_e2e_percentile(const struct DpsRunResult *result, double p, double *out);

/**
 * # Safety
 * `result` must be NULL or a live handle, not used afterwards.
 */
void dps_run_free(struct DpsRunResult *result);

/**
 * Projected compute delay (ms) of one more request at a UPF bucket.
 *
 * # Safety
 * `out` must be writable.
 */
enum DpsStatus dps_upf_projected_delay(uint64_t queue_len,
                                       double headroom,
                                       double capacity,
                                       double delta_ms,
                                       double *out);

/**
 * Link delay (ms) of `n_share` requests of `bytes` each on a link of
 * `bandwidth_mbps`.
 *
 * # Safety
 * `out` must be writable.
 */
enum DpsStatus dps_net_delay(uint64_t n_share,
                             double bytes,
                             double bandwidth_mbps,
                             double delta_ms,
                             double *out);

/**
 * Index (0-based) and projected delay of the least-loaded server among `len` loads.
 *
 * # Safety
 * `loads` must point to `len` readable elements; outputs must be writable.
 */
enum DpsStatus dps_find_bestfit(const struct DpsLoad *loads,
                                size_t len,
                                double delta_ms,
                                size_t *out_index,
                                double *out_delay);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DATAPLANE_SIM_H */
