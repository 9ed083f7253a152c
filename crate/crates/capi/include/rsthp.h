/* C interface to the rsthp link-level simulator. */

#ifndef RSTHP_H
#define RSTHP_H

/* Generated by cbindgen from the rsthp-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible API call. `RSTHP_STATUS_OK` is zero so the
// usual `if (rsthp_...(...))` error check works.
typedef enum RsthpStatus {
  RSTHP_STATUS_OK = 0,
  // A required pointer argument was null.
  RSTHP_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  RSTHP_STATUS_INVALID_UTF8 = 2,
  // The experiment or an argument failed validation.
  RSTHP_STATUS_CONFIG_ERROR = 3,
  // The computation failed numerically (rank deficiency, divergence, …).
  RSTHP_STATUS_NUMERIC_ERROR = 4,
  // An index was past the end of the results.
  RSTHP_STATUS_INDEX_OUT_OF_RANGE = 5,
  // An internal panic was caught at the boundary.
  RSTHP_STATUS_PANIC = 6,
} RsthpStatus;

// Opaque experiment description: schemes, SNR grid, system geometry,
// error model, and the common-stream power policy.
typedef struct RsthpExperiment RsthpExperiment;

// Opaque result table produced by running an experiment.
typedef struct RsthpResults RsthpResults;

// One row of a result table, as plain numbers. The scheme id is exposed
// separately through [`rsthp_results_scheme`].
typedef struct RsthpResultRow {
  double snr_db;
  double sigma_e2;
  // Common-stream power fraction the row was evaluated at.
  double delta;
  double esr_total;
  double esr_common;
  double esr_private;
  // 95% confidence halfwidth on `esr_total`.
  double ci_halfwidth;
  size_t n_channels;
  size_t n_errors;
  uint64_t seed;
} RsthpResultRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; never free it.
const char *rsthp_version(void);

// Message of the most recent failure on this thread, or null if the last
// call succeeded or nothing ran yet. Valid until the next failing call on
// the same thread; never free it.
const char *rsthp_last_error_message(void);

// Parse an experiment description from TOML text (same schema as the CLI's
// `run --config` files). On success writes a new handle to `out`.
//
// # Safety
// `text` must be NUL-terminated; `out` must be a valid pointer.
enum RsthpStatus rsthp_experiment_from_toml(const char *text, struct RsthpExperiment **out);

// Build the preset benchmark experiment: the six-scheme lineup at 20 dB,
// (12 antennas, 6 users × 2), at one channel-error variance.
//
// # Safety
// `out` must be a valid pointer.
enum RsthpStatus rsthp_experiment_benchmark(uint64_t seed,
                                            size_t mc_channels,
                                            size_t mc_errors,
                                            double sigma_e2,
                                            struct RsthpExperiment **out);

// Override the experiment's seed.
//
// # Safety
// `experiment` must be a live handle from this library.
enum RsthpStatus rsthp_experiment_set_seed(struct RsthpExperiment *experiment, uint64_t seed);

// Release an experiment handle (null is a no-op).
//
// # Safety
// `experiment` must be null or a live handle from this library; it must
// not be used afterwards.
void rsthp_experiment_free(struct RsthpExperiment *experiment);

// Run the experiment and hand back a result table. Deterministic: the same
// experiment and seed produce the same table on every run and thread count.
//
// # Safety
// `experiment` must be a live handle; `out` must be a valid pointer.
enum RsthpStatus rsthp_experiment_run(const struct RsthpExperiment *experiment,
                                      struct RsthpResults **out);

// Run the full three-variance benchmark table (18 rows) in one call.
//
// # Safety
// `out` must be a valid pointer.
enum RsthpStatus rsthp_run_benchmark(uint64_t seed,
                                     size_t mc_channels,
                                     size_t mc_errors,
                                     struct RsthpResults **out);

// Number of rows in a result table; 0 for null.
//
// # Safety
// `results` must be null or a live handle.
size_t rsthp_results_len(const struct RsthpResults *results);

// Copy row `index` into `out`.
//
// # Safety
// `results` must be a live handle; `out` must be a valid pointer.
enum RsthpStatus rsthp_results_row(const struct RsthpResults *results,
                                   size_t index,
                                   struct RsthpResultRow *out);

// Scheme id of row `index`, borrowed from the table (valid until the table
// is freed; never free it). Null if the handle is null or the index is out
// of range.
//
// # Safety
// `results` must be null or a live handle.
const char *rsthp_results_scheme(const struct RsthpResults *results, size_t index);

// Render the whole table as CSV (header plus one line per row). The string
// is owned by the caller: release it with [`rsthp_string_free`].
//
// # Safety
// `results` must be a live handle; `out` must be a valid pointer.
enum RsthpStatus rsthp_results_csv(const struct RsthpResults *results, char **out);

// Render the whole table as a pretty JSON array. The string is owned by
// the caller: release it with [`rsthp_string_free`].
//
// # Safety
// `results` must be a live handle; `out` must be a valid pointer.
enum RsthpStatus rsthp_results_json(const struct RsthpResults *results, char **out);

// Release a result table (null is a no-op).
//
// # Safety
// `results` must be null or a live handle; it must not be used afterwards.
void rsthp_results_free(struct RsthpResults *results);

// Release a string produced by this library.
//
// # Safety
// `s` must be null or a string returned through a `char**` out-parameter
// of this library; it must not be used afterwards.
void rsthp_string_free(char *s);

// Per-frame floating-point operation count of a scheme's transmit chain
// at `n` antennas and `k` users. `scheme_id` uses the CLI's flops ids,
// e.g. "zf-thp" or "rs-mmse-thp-mmsec" (case-insensitive).
//
// # Safety
// `scheme_id` must be NUL-terminated; `out` must be a valid pointer.
enum RsthpStatus rsthp_flops(const char *scheme_id, int64_t n, int64_t k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RSTHP_H */
