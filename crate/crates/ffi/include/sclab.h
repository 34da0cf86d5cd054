#ifndef SCLAB_H
#define SCLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SclabStatus {
  SCLAB_STATUS_OK = 0,
  SCLAB_STATUS_NULL_POINTER = 1,
  SCLAB_STATUS_INVALID_UTF8 = 2,
  SCLAB_STATUS_UNKNOWN_EXPERIMENT = 3,
  SCLAB_STATUS_INVALID_CONFIG = 4,
  SCLAB_STATUS_INVALID_ARGUMENT = 5,
  SCLAB_STATUS_UNREPRESENTABLE = 6,
  SCLAB_STATUS_OUT_OF_RANGE = 7,
  SCLAB_STATUS_INTERNAL = 8,
} SclabStatus;

/**
 * Opaque experiment report.
 */
typedef struct SclabReport SclabReport;

/**
 * Opaque finite sequence vector.
 */
typedef struct SclabSeq SclabSeq;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *sclab_last_error(void);

size_t sclab_experiment_count(void);

/**
 * Id of catalogue entry `index`, as a newly allocated string.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum SclabStatus sclab_experiment_id(size_t index, char **out);

/**
 * Runs experiment `id` with an optional flat JSON config (null for defaults).
 *
 * # Safety
 * `id` must be a nul-terminated string, `config_json` null or a
 * nul-terminated string, `out` writable. Release the report with
 * [`sclab_report_free`].
 */
enum SclabStatus sclab_run(const char *id, const char *config_json, struct SclabReport **out);

/**
 * 1 when every check passed, 0 otherwise, -1 for a null report.
 *
 * # Safety
 * `report` must be null or a live report from [`sclab_run`].
 */
int32_t sclab_report_passed(const struct SclabReport *report);

/**
 * Number of check records, 0 for a null report.
 *
 * # Safety
 * `report` must be null or a live report from [`sclab_run`].
 */
size_t sclab_report_check_count(const struct SclabReport *report);

/**
 * The report as pretty JSON in a newly allocated string.
 *
 * # Safety
 * `report` must be a live report, `out` writable.
 */
enum SclabStatus sclab_report_json(const struct SclabReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a report from [`sclab_run`] not freed before.
 */
void sclab_report_free(struct SclabReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library not freed before.
 */
void sclab_string_free(char *s);

/**
 * `e^{-e^{1/t^2}}` in log form: `sign` is 0 for an exact zero.
 *
 * # Safety
 * `sign` and `logmag` must be writable.
 */
enum SclabStatus sclab_phi_gate(double t, int8_t *sign, double *logmag);

/**
 * Sequence vector with coefficients of `e_1, ..., e_len`.
 *
 * # Safety
 * `coeffs` must point to `len` readable doubles (or be null with
 * `len == 0`); `out` writable. Release with [`sclab_seq_free`].
 */
enum SclabStatus sclab_seq_new(const double *coeffs, size_t len, struct SclabSeq **out);

/**
 * Level-`level` norm of the sequence vector.
 *
 * # Safety
 * `seq` must be a live vector, `out` writable.
 */
enum SclabStatus sclab_seq_norm(const struct SclabSeq *seq, uint32_t level, double *out);

/**
 * `s_t(x)` as a new sequence vector.
 *
 * # Safety
 * `seq` must be a live vector, `out` writable.
 */
enum SclabStatus sclab_seq_diffeo(const struct SclabSeq *seq, double t, struct SclabSeq **out);

/**
 * # Safety
 * `seq` must be null or a vector from this library not freed before.
 */
void sclab_seq_free(struct SclabSeq *seq);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCLAB_H */
