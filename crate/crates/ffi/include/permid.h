#ifndef PERMID_H
#define PERMID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum PermidStatus {
  PERMID_STATUS_OK = 0,
  PERMID_STATUS_INVALID_PARAMETER = 1,
  PERMID_STATUS_OVERFLOW = 2,
  PERMID_STATUS_DIMENSION_MISMATCH = 3,
  PERMID_STATUS_SYMBOL_OUT_OF_RANGE = 4,
  PERMID_STATUS_INVALID_CODE = 5,
  PERMID_STATUS_HYPOTHESIS = 6,
  PERMID_STATUS_INFEASIBLE = 7,
  PERMID_STATUS_INAPPLICABLE = 8,
  PERMID_STATUS_BUDGET = 9,
  PERMID_STATUS_BOUND_VIOLATION = 10,
  PERMID_STATUS_FORMAT = 11,
  PERMID_STATUS_NULL_POINTER = 12,
  PERMID_STATUS_UTF8 = 13,
  PERMID_STATUS_PANIC = 14,
} PermidStatus;

/**
 * Opaque handle to any loaded document.
 */
typedef struct PermidCode PermidCode;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *permid_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void permid_string_free(char *s);

/**
 * Parses a code document (perm, noiseless, feedback or setsystem).
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum PermidStatus permid_code_from_json(const char *json, struct PermidCode **out);

/**
 * Serializes a code back to its document form.
 *
 * # Safety
 * `code` must be a live handle; `out` must be writable.
 */
enum PermidStatus permid_code_to_json(const struct PermidCode *code, char **out);

/**
 * Releases a code handle. Null is ignored.
 *
 * # Safety
 * `code` must come from this library and not have been freed already.
 */
void permid_code_free(struct PermidCode *code);

/**
 * Number of messages of a code.
 *
 * # Safety
 * `code` must be a live handle; `out` must be writable.
 */
enum PermidStatus permid_code_messages(const struct PermidCode *code, size_t *out);

/**
 * Exact error report as JSON. At most `matrix_cap` matrix entries are listed.
 *
 * # Safety
 * `code` must be a live handle; `out` must be writable.
 */
enum PermidStatus permid_eval_exact(const struct PermidCode *code, size_t matrix_cap, char **out);

/**
 * Monte Carlo error report as JSON; identical arguments give identical output.
 *
 * # Safety
 * `code` must be a live handle; `out` must be writable.
 */
enum PermidStatus permid_eval_mc(const struct PermidCode *code,
                                 uint64_t trials,
                                 uint64_t seed,
                                 size_t matrix_cap,
                                 char **out);

/**
 * Draws a feedback code with `l` blocks of length `n` over `q` symbols.
 *
 * # Safety
 * `out` must be writable.
 */
enum PermidStatus permid_feedback_build(size_t n,
                                        size_t q,
                                        size_t l,
                                        size_t m,
                                        uint64_t seed,
                                        struct PermidCode **out);

/**
 * Checks `λ2 ≤ 2/N` on a feedback code; `pass` receives the verdict and
 * `report` (if not null) the full JSON report.
 *
 * # Safety
 * `code` must be a live handle; `pass` must be writable; `report` may be null.
 */
enum PermidStatus permid_feedback_target_test(const struct PermidCode *code,
                                              bool early_exit,
                                              bool *pass,
                                              char **report);

/**
 * Number of types of length-`n` vectors over `q` symbols, in decimal.
 *
 * # Safety
 * `out` must be writable.
 */
enum PermidStatus permid_count_types(size_t n, size_t q, char **out);

/**
 * Inverse of the binary entropy on `[0, 1/2]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PermidStatus permid_h2_inv(double v, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERMID_H */
