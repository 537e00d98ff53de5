/* C interface to the spincav gate simulator. Generated by cbindgen. */

#ifndef SPINCAV_H
#define SPINCAV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum SpincavStatus {
  /**
   * Operation succeeded.
   */
  SPINCAV_STATUS_OK = 0,
  /**
   * A pointer argument was null or otherwise unusable.
   */
  SPINCAV_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input failed validation (bad JSON, schema violation, broken invariant).
   */
  SPINCAV_STATUS_VALIDATION = 2,
  /**
   * Numerical failure: non-finite values or a solver that did not converge.
   */
  SPINCAV_STATUS_NUMERICAL = 3,
} SpincavStatus;

/**
 * Parsed run configuration. Opaque to C callers.
 */
typedef struct SpincavConfig SpincavConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON run configuration into a new handle.
 *
 * # Safety
 * `json` must point to a NUL-terminated string; `out` must be a valid
 * writable pointer. On success `*out` owns the handle until
 * `spincav_config_free`.
 */
enum SpincavStatus spincav_config_parse(const char *json, struct SpincavConfig **out);

/**
 * Releases a handle from `spincav_config_parse`. Null is a no-op.
 *
 * # Safety
 * `config` must be a handle returned by this library, not yet freed.
 */
void spincav_config_free(struct SpincavConfig *config);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be a string returned by this library, not yet freed.
 */
void spincav_string_free(char *s);

/**
 * Adiabaticity check of every dot against the configured margin policy.
 *
 * # Safety
 * `config` must be a live handle; `out_json` must be writable.
 */
enum SpincavStatus spincav_check(const struct SpincavConfig *config, char **out_json);

/**
 * Solves the first dot's peak laser coupling for the configured pulse area.
 *
 * # Safety
 * `config` must be a live handle; `out_json` must be writable.
 */
enum SpincavStatus spincav_solve_area(const struct SpincavConfig *config, char **out_json);

/**
 * Extracts the two-qubit gate for the configured device and grid.
 *
 * # Safety
 * `config` must be a live handle; `out_json` must be writable.
 */
enum SpincavStatus spincav_gate(const struct SpincavConfig *config, char **out_json);

/**
 * Propagates the configured initial state. Either output may be null to
 * skip it; the trajectory is produced by the same single run.
 *
 * # Safety
 * `config` must be a live handle; non-null outputs must be writable.
 */
enum SpincavStatus spincav_simulate(const struct SpincavConfig *config,
                                    char **out_summary_json,
                                    char **out_trajectory_csv);

/**
 * Runs the configured feasibility scan. Either output may be null to
 * skip it; both come from the same scan.
 *
 * # Safety
 * `config` must be a live handle; non-null outputs must be writable.
 */
enum SpincavStatus spincav_scan(const struct SpincavConfig *config,
                                char **out_region_json,
                                char **out_region_csv);

/**
 * Message for the most recent failure on this thread; empty string if
 * none. Borrowed; valid until the next library call on this thread.
 */
const char *spincav_last_error(void);

/**
 * Library version as a static string; do not free.
 */
const char *spincav_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINCAV_H */
