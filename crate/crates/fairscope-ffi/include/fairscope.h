#ifndef FAIRSCOPE_H
#define FAIRSCOPE_H

/* Generated by cbindgen from the fairscope-ffi crate. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum {
  // The call succeeded and any out-pointer was written.
  FS_STATUS_OK = 0,
  // A required pointer argument was NULL.
  FS_STATUS_NULL_ARGUMENT = 1,
  // A numeric argument does not name a known variant.
  FS_STATUS_INVALID_ARGUMENT = 2,
  // The input bytes were not valid for the expected format.
  FS_STATUS_PARSE_ERROR = 3,
  // The computation rejected the input (for example a table missing
  // one of the gender rows).
  FS_STATUS_COMPUTE_ERROR = 4,
  // The named model is not part of the report.
  FS_STATUS_NOT_FOUND = 5,
  // An unexpected internal failure; the library state is unchanged.
  FS_STATUS_INTERNAL_ERROR = 6,
} FsStatus;

// Fairness definition selector for [`fs_gap_report_compute`].
typedef enum {
  FS_DEFINITION_DP = 0,
  FS_DEFINITION_EQOP = 1,
  FS_DEFINITION_EQOD = 2,
} FsDefinition;

// Training regime selector for [`fs_gap_report_compute`].
typedef enum {
  FS_REGIME_REGULAR = 0,
  FS_REGIME_FEMALE_TRAINED = 1,
  FS_REGIME_MALE_TRAINED = 2,
} FsRegime;

// Per-model aggregation selector for [`fs_gap_report_compute`].
typedef enum {
  FS_AGGREGATION_MEAN = 0,
  FS_AGGREGATION_MAX = 1,
} FsAggregation;

// TPR/FPR combination selector for the equalized-odds definition.
typedef enum {
  FS_EQOD_COMBINE_MEAN = 0,
  FS_EQOD_COMBINE_MAX = 1,
  FS_EQOD_COMBINE_SUM = 2,
} FsEqodCombine;

// Opaque gap report handle.
typedef struct FsGapReport FsGapReport;

// Opaque metric table handle.
typedef struct FsMetricTable FsMetricTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a metric CSV held in memory into a table handle.
//
// # Safety
// `data` must point to `len` readable bytes and `out` must be a valid
// pointer. On `Ok` the handle written to `out` must eventually be
// released with [`fs_metric_table_free`].
FsStatus fs_metric_table_from_csv(const uint8_t *data, size_t len, FsMetricTable **out);

// Loads the metric table bundled with the library.
//
// # Safety
// `out` must be a valid pointer. On `Ok` the handle written to `out`
// must eventually be released with [`fs_metric_table_free`].
FsStatus fs_fixture_table(FsMetricTable **out);

// Writes the number of (regime, set, model, class) cells in the table.
//
// # Safety
// `table` must be a live handle from this library and `out` must be a
// valid pointer.
FsStatus fs_metric_table_cell_count(const FsMetricTable *table, size_t *out);

// Releases a table handle. NULL is ignored.
//
// # Safety
// `table` must be a handle from this library that has not been freed,
// or NULL.
void fs_metric_table_free(FsMetricTable *table);

// Computes a gap report over `table`.
//
// The selector arguments take values of [`FsDefinition`], [`FsRegime`],
// [`FsAggregation`] and [`FsEqodCombine`]; anything else returns
// `InvalidArgument`. `eqod_combine` is consulted only when `definition`
// is `Eqod` but must always be a valid value.
//
// # Safety
// `table` must be a live handle from this library and `out` must be a
// valid pointer. On `Ok` the handle written to `out` must eventually be
// released with [`fs_gap_report_free`].
FsStatus fs_gap_report_compute(const FsMetricTable *table,
                               uint32_t definition,
                               uint32_t regime,
                               uint32_t aggregation,
                               uint32_t eqod_combine,
                               FsGapReport **out);

// Writes the aggregate gap of one model to `out`.
//
// # Safety
// `report` must be a live handle from this library, `model_id` must be
// a NUL-terminated string and `out` must be a valid pointer.
FsStatus fs_gap_report_aggregate(const FsGapReport *report, const char *model_id, double *out);

// Serializes a gap report to a JSON string.
//
// # Safety
// `report` must be a live handle from this library and `out` must be a
// valid pointer. On `Ok` the string written to `out` must eventually be
// released with [`fs_string_free`].
FsStatus fs_gap_report_to_json(const FsGapReport *report, char **out);

// Releases a gap report handle. NULL is ignored.
//
// # Safety
// `report` must be a handle from this library that has not been freed,
// or NULL.
void fs_gap_report_free(FsGapReport *report);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `text` must be a string returned by this library that has not been
// freed, or NULL.
void fs_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAIRSCOPE_H */
