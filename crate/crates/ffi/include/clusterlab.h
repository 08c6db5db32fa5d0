/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CLUSTERLAB_H
#define CLUSTERLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ClFormat {
  CL_JSON = 0,
  CL_CSV = 1,
} ClFormat;

typedef enum ClRunKind {
  CL_PARTITION = 0,
  CL_LIMIT = 1,
  CL_CONTOUR = 2,
  CL_BOUNDS = 3,
} ClRunKind;

/**
 * Result codes. Zero is success; `CL_CHECKS_FAILED` means a run completed
 * but at least one check did not hold.
 */
typedef enum ClStatus {
  CL_OK = 0,
  CL_CHECKS_FAILED = 1,
  CL_NULL_POINTER = 2,
  CL_INVALID_UTF8 = 3,
  CL_INVALID_PARAMS = 4,
  CL_GROWTH_VIOLATION = 5,
  CL_CONFIG_ERROR = 6,
  CL_CAP_EXCEEDED = 7,
  CL_NUMERIC_FAILURE = 8,
  CL_IO_ERROR = 9,
  CL_PANIC = 10,
} ClStatus;

/**
 * A resolved run configuration.
 */
typedef struct ClConfig ClConfig;

/**
 * A finished run: the rendered bytes and the overall verdict.
 */
typedef struct ClReport ClReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library version as a static NUL-terminated string.
 */
const char *cl_version(void);

/**
 * Copies the last error message of this thread into `buf` (truncated and
 * NUL-terminated) and returns its full length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t cl_last_error(char *buf, size_t len);

/**
 * The built-in configuration for `kind`.
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
enum ClStatus cl_config_default(enum ClRunKind kind, struct ClConfig **out);

/**
 * Parses a TOML configuration for `kind`. Relative coupling files resolve
 * against the working directory.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ClStatus cl_config_from_toml(enum ClRunKind kind, const char *toml, struct ClConfig **out);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum ClStatus cl_config_set_seed(struct ClConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be null or a handle not yet freed.
 */
void cl_config_free(struct ClConfig *config);

/**
 * Runs the suite matching the configuration's kind. Returns `ClOk` or
 * `ClChecksFailed` with a report in `out`, or an error code and no report.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum ClStatus cl_run(const struct ClConfig *config, enum ClFormat format, struct ClReport **out);

/**
 * 1 if every check in the report held, 0 otherwise (or for null).
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int32_t cl_report_passed(const struct ClReport *report);

/**
 * The rendered report. The bytes stay valid until the report is freed and
 * are not NUL-terminated.
 *
 * # Safety
 * `report` must be a live handle and `len` a valid pointer.
 */
const uint8_t *cl_report_bytes(const struct ClReport *report, size_t *len);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void cl_report_free(struct ClReport *report);

/**
 * `Z` of the configured instance as an exact `num/den` string. Free it
 * with [`cl_string_free`].
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum ClStatus cl_partition_function(const struct ClConfig *config, char **out);

/**
 * `(ln |Z|)/N` and the target `Σ pⁱJᵢ` of the configured instance.
 *
 * # Safety
 * `config` must be a live handle; the outputs must be valid pointers.
 */
enum ClStatus cl_log_partition_per_site(const struct ClConfig *config,
                                        double *ln_z_per_n,
                                        double *target);

/**
 * The root `w*` of `ψ(w) = ln a`.
 *
 * # Safety
 * `w_star` must be a valid pointer.
 */
enum ClStatus cl_stationary_point(double a, double *w_star);

/**
 * Bits used for floating evaluations unless a config says otherwise.
 */
size_t cl_default_precision(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void cl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLUSTERLAB_H */
