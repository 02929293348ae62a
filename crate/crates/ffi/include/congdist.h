/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CONGDIST_H
#define CONGDIST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_POINTER = 1,
  CD_STATUS_INVALID_UTF8 = 2,
  CD_STATUS_PARSE = 3,
  CD_STATUS_UNKNOWN_CORPUS = 4,
  CD_STATUS_SIZE_BOUND = 5,
  CD_STATUS_INVALID_ARGUMENT = 6,
  CD_STATUS_INTERNAL = 7,
} CdStatus;

/**
 * An algebra together with its lazily computed congruence lattice.
 */
typedef struct CdAlgebra CdAlgebra;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses an algebra in the text format (`size N`, then `op NAME ARITY` tables).
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CdStatus cd_algebra_from_text(const char *source, struct CdAlgebra **out);

/**
 * Looks up a built-in algebra by name (for example `"median"`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CdStatus cd_algebra_from_corpus(const char *name, struct CdAlgebra **out);

/**
 * Releases a handle. Passing null is a no-op.
 *
 * # Safety
 * `alg` must come from this library and must not be used afterwards.
 */
void cd_algebra_free(struct CdAlgebra *alg);

/**
 * # Safety
 * `alg` and `out` must be valid pointers.
 */
enum CdStatus cd_algebra_size(const struct CdAlgebra *alg, size_t *out);

/**
 * Number of congruences.
 *
 * # Safety
 * `alg` and `out` must be valid pointers.
 */
enum CdStatus cd_congruence_count(const struct CdAlgebra *alg, size_t *out);

/**
 * Whether every congruence lattice in the family is distributive. With
 * `deep`, the family is the algebra, its square, its quotients and its free
 * algebra on three generators; otherwise it is the algebra alone.
 *
 * # Safety
 * `alg` and `out` must be valid pointers.
 */
enum CdStatus cd_is_distributive(const struct CdAlgebra *alg, bool deep, bool *out);

/**
 * Trapezoid lemma on every congruence triple of the family.
 *
 * # Safety
 * `alg` and `out` must be valid pointers.
 */
enum CdStatus cd_check_trapezoid(const struct CdAlgebra *alg, bool deep, bool *out);

/**
 * Least relational Jonsson order up to `max_n`, or 0.
 *
 * # Safety
 * `alg` and `out` must be valid pointers.
 */
enum CdStatus cd_relational_order(const struct CdAlgebra *alg,
                                  size_t max_n,
                                  bool deep,
                                  size_t *out);

/**
 * Least Jonsson chain order found in the free algebra on three generators,
 * up to `max_n`, or 0.
 *
 * # Safety
 * `alg` and `out` must be valid pointers.
 */
enum CdStatus cd_chain_order(const struct CdAlgebra *alg, size_t max_n, size_t *out);

/**
 * Message of the last failing call on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *cd_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONGDIST_H */
