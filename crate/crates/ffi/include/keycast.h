#ifndef KEYCAST_H
#define KEYCAST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KcStatus {
  KC_OK = 0,
  KC_NULL_POINTER = 1,
  KC_INVALID_UTF8 = 2,
  KC_PARSE_ERROR = 3,
  KC_BAD_PARAMS = 4,
  KC_INFEASIBLE = 5,
  KC_BUDGET_EXCEEDED = 6,
  KC_VERDICT_FAILURE = 7,
  KC_BUFFER_TOO_SMALL = 8,
  KC_OUT_OF_RANGE = 9,
  KC_PANIC = 10,
} KcStatus;

typedef struct KcInstance KcInstance;

typedef struct KcReport KcReport;

typedef struct KcRun KcRun;

typedef struct KcScheme KcScheme;

/**
 * Optional scheme parameters; a negative value selects the default.
 */
typedef struct KcParams {
  int64_t d;
  int64_t ell;
  int64_t x;
  int64_t z;
} KcParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of the calling thread.
 *
 * # Safety
 * `buf` must be valid for `len` bytes; `needed` may be null.
 */
enum KcStatus kc_last_error(char *buf, size_t len, size_t *needed);

/**
 * Parses a `keycast v1` text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KcStatus kc_instance_parse(const char *text, struct KcInstance **out);

/**
 * Builds a canonical fixture such as `fig2` or `partial_mix`.
 *
 * # Safety
 * `kind` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KcStatus kc_instance_generate(const char *kind,
                                   size_t d,
                                   uint32_t q,
                                   size_t ell,
                                   struct KcInstance **out);

/**
 * Canonical text of an instance.
 *
 * # Safety
 * `inst` must come from this library; `buf` must be valid for `len` bytes.
 */
enum KcStatus kc_instance_emit(const struct KcInstance *inst,
                               char *buf,
                               size_t len,
                               size_t *needed);

/**
 * Minimum source-to-terminal connectivity, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or come from this library.
 */
size_t kc_instance_default_d(const struct KcInstance *inst);

/**
 * # Safety
 * `inst` must be null or come from this library and not be used afterwards.
 */
void kc_instance_free(struct KcInstance *inst);

/**
 * Compiles a scheme (`full`, `multisource`, `partial`,
 * `partial-multisource`, `unstructured`) for an instance.
 *
 * # Safety
 * `inst` must come from this library, `scheme` must be a NUL-terminated
 * string and `out` a valid pointer.
 */
enum KcStatus kc_scheme_compile(const struct KcInstance *inst,
                                const char *scheme,
                                struct KcParams params,
                                struct KcScheme **out);

/**
 * Guaranteed rate of the compiled scheme as a reduced fraction.
 *
 * # Safety
 * `scheme` must come from this library; `num` and `den` must be valid.
 */
enum KcStatus kc_scheme_formula(const struct KcScheme *scheme, uint64_t *num, uint64_t *den);

/**
 * Number of terminal sets, i.e. of keys per run.
 *
 * # Safety
 * `scheme` must be null or come from this library.
 */
size_t kc_scheme_key_count(const struct KcScheme *scheme);

/**
 * # Safety
 * `scheme` must be null or come from this library and not be used afterwards.
 */
void kc_scheme_free(struct KcScheme *scheme);

/**
 * Executes the scheme with randomness derived from `seed`.
 *
 * # Safety
 * `scheme` must come from this library and `out` must be valid.
 */
enum KcStatus kc_scheme_run(const struct KcScheme *scheme, uint64_t seed, struct KcRun **out);

/**
 * Length of every key in field symbols.
 *
 * # Safety
 * `run` must be null or come from this library.
 */
size_t kc_run_key_len(const struct KcRun *run);

/**
 * Copies the key of terminal set `set` (0-based) into `buf`.
 *
 * # Safety
 * `run` must come from this library; `buf` must be valid for `len` values.
 */
enum KcStatus kc_run_key(const struct KcRun *run, size_t set, uint32_t *buf, size_t len);

/**
 * Achieved rate as `key_len / blocklength` (not reduced), and whether it
 * meets the scheme's guarantee.
 *
 * # Safety
 * `run` must come from this library; output pointers must be valid.
 */
enum KcStatus kc_run_rate(const struct KcRun *run,
                          uint64_t *key_len,
                          uint64_t *blocklength,
                          bool *met);

/**
 * # Safety
 * `run` must be null or come from this library and not be used afterwards.
 */
void kc_run_free(struct KcRun *run);

/**
 * Exhaustive security audit. `budget` caps the number of randomness
 * states; 0 selects the library default. A leak is not an error: check
 * [`kc_report_passed`].
 *
 * # Safety
 * `scheme` must come from this library and `out` must be valid.
 */
enum KcStatus kc_scheme_audit(const struct KcScheme *scheme,
                              uint64_t budget,
                              struct KcReport **out);

/**
 * True when every admissible eavesdropper set has zero mutual information
 * with the key and every key is uniform.
 *
 * # Safety
 * `report` must be null or come from this library.
 */
bool kc_report_passed(const struct KcReport *report);

/**
 * Human-readable report text.
 *
 * # Safety
 * `report` must come from this library; `buf` must be valid for `len` bytes.
 */
enum KcStatus kc_report_text(const struct KcReport *report, char *buf, size_t len, size_t *needed);

/**
 * # Safety
 * `report` must be null or come from this library and not be used afterwards.
 */
void kc_report_free(struct KcReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KEYCAST_H */
