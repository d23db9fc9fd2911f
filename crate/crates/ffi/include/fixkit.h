/* SPDX-License-Identifier: Apache-2.0 */

#ifndef FIXKIT_H
#define FIXKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum FixkitStatus {
  FIXKIT_STATUS_OK = 0,
  FIXKIT_STATUS_NULL_ARGUMENT = 1,
  FIXKIT_STATUS_INVALID_UTF8 = 2,
  /**
   * Schema or value text could not be read.
   */
  FIXKIT_STATUS_PARSE = 3,
  /**
   * The schema is invalid.
   */
  FIXKIT_STATUS_VALIDATION = 4,
  FIXKIT_STATUS_UNKNOWN_NAME = 5,
  /**
   * Guarded evaluation found an ill-typed argument.
   */
  FIXKIT_STATUS_GUARD = 6,
  /**
   * Any other evaluation failure, such as the depth limit.
   */
  FIXKIT_STATUS_EVAL = 7,
  FIXKIT_STATUS_IO = 8,
  FIXKIT_STATUS_PANIC = 9,
} FixkitStatus;

/**
 * Opaque handle to a loaded schema with its functions and visitors.
 */
typedef struct FixkitSession FixkitSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *fixkit_last_error(void);

/**
 * Parses and validates `.fty` source text.
 *
 * # Safety
 * `source` is a NUL-terminated string and `out` is writable.
 */
enum FixkitStatus fixkit_session_load(const char *source, struct FixkitSession **out);

/**
 * # Safety
 * `session` is null or a handle from [`fixkit_session_load`] not yet freed.
 */
void fixkit_session_free(struct FixkitSession *session);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` is null or a string from this library not yet freed.
 */
void fixkit_string_free(char *s);

/**
 * Writes the fix of `value` at type `ty`.
 *
 * # Safety
 * Pointers are valid as documented on the module.
 */
enum FixkitStatus fixkit_fix(const struct FixkitSession *session,
                             const char *ty,
                             const char *value_text,
                             char **out);

/**
 * Sets `*out` to 1 if `value` is of type `ty`, else 0.
 *
 * # Safety
 * Pointers are valid as documented on the module.
 */
enum FixkitStatus fixkit_recognize(const struct FixkitSession *session,
                                   const char *ty,
                                   const char *value_text,
                                   int32_t *out);

/**
 * Sets `*out` to 1 if `a` and `b` have equal fixes at `ty`, else 0.
 *
 * # Safety
 * Pointers are valid as documented on the module.
 */
enum FixkitStatus fixkit_equiv(const struct FixkitSession *session,
                               const char *ty,
                               const char *a,
                               const char *b,
                               int32_t *out);

/**
 * Writes the count measure of `value` at `ty`.
 *
 * # Safety
 * Pointers are valid as documented on the module.
 */
enum FixkitStatus fixkit_count(const struct FixkitSession *session,
                               const char *ty,
                               const char *value_text,
                               uint64_t *out);

/**
 * Evaluates a call such as `(aterm-eval (:num 1))`. `guarded` selects
 * guard-checking evaluation instead of the fixing semantics.
 *
 * # Safety
 * Pointers are valid as documented on the module.
 */
enum FixkitStatus fixkit_eval(const struct FixkitSession *session,
                              const char *call,
                              bool guarded,
                              char **out);

/**
 * Runs a visitor by name.
 *
 * # Safety
 * Pointers are valid as documented on the module.
 */
enum FixkitStatus fixkit_visit(const struct FixkitSession *session,
                               const char *visitor,
                               const char *value_text,
                               char **out);

/**
 * Writes `n` generated values of `ty`, one per line.
 *
 * # Safety
 * Pointers are valid as documented on the module.
 */
enum FixkitStatus fixkit_gen(const struct FixkitSession *session,
                             const char *ty,
                             uint64_t n,
                             uint64_t size,
                             uint64_t seed,
                             char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIXKIT_H */
