#ifndef ZMW_H
#define ZMW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum ZmwStatus {
  ZMW_STATUS_OK = 0,
  ZMW_STATUS_NULL_POINTER = 1,
  ZMW_STATUS_INVALID_ARGUMENT = 2,
  ZMW_STATUS_INVALID_SHIFT_SET = 3,
  ZMW_STATUS_DOMAIN = 4,
  ZMW_STATUS_DIVERGENT = 5,
  ZMW_STATUS_RESOURCE = 6,
  ZMW_STATUS_BOUNDS = 7,
  ZMW_STATUS_IO = 8,
  ZMW_STATUS_PANIC = 9,
} ZmwStatus;

// Opaque shift set.
typedef struct ZmwShiftSet ZmwShiftSet;

// Opaque table of `tau_A(n)`.
typedef struct ZmwTauTable ZmwTauTable;

// A complex number as two doubles.
typedef struct ZmwComplex {
  double re;
  double im;
} ZmwComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *zmw_last_error_message(void);

// Library version, a static NUL-terminated string.
const char *zmw_version(void);

// Frees a string returned by this library. Null is ignored.
void zmw_string_free(char *s);

// Builds a shift set from `len` real and imaginary parts. With `allow_repeats`
// nonzero, repeated entries are accepted (e.g. `{0, 0}` for the divisor
// function); otherwise entries must be pairwise separated.
enum ZmwStatus zmw_shift_set_new(const double *re,
                                 const double *im,
                                 size_t len,
                                 int32_t allow_repeats,
                                 struct ZmwShiftSet **out);

size_t zmw_shift_set_len(const struct ZmwShiftSet *set);

// Frees a shift set. Null is ignored.
void zmw_shift_set_free(struct ZmwShiftSet *set);

// Riemann zeta at `re + i im`.
enum ZmwStatus zmw_zeta(double re, double im, struct ZmwComplex *out);

// `tau_A(n)` for `1 <= n <= limit`.
enum ZmwStatus zmw_tau_table_build(const struct ZmwShiftSet *set,
                                   uint64_t limit,
                                   struct ZmwTauTable **out);

// `tau_A(n)`; `n = 0` and `n > limit` are bounds errors.
enum ZmwStatus zmw_tau_table_get(const struct ZmwTauTable *table,
                                 uint64_t n,
                                 struct ZmwComplex *out);

uint64_t zmw_tau_table_limit(const struct ZmwTauTable *table);

// Frees a table. Null is ignored.
void zmw_tau_table_free(struct ZmwTauTable *table);

// The Euler product `A(A, B)` over primes `<= bound`, corrected for the
// omitted primes, with its error estimate.
enum ZmwStatus zmw_euler_a(const struct ZmwShiftSet *a,
                           const struct ZmwShiftSet *b,
                           uint64_t bound,
                           struct ZmwComplex *value,
                           double *error_estimate);

// `I(T; X)` from two tables covering `X`, with the standard weight.
enum ZmwStatus zmw_moment_empirical(const struct ZmwTauTable *a,
                                    const struct ZmwTauTable *b,
                                    double big_t,
                                    uint64_t x,
                                    struct ZmwComplex *out);

// Empirical and conjectured `I(T; X)` as a JSON report (timings excluded).
// Free the string with [`zmw_string_free`].
enum ZmwStatus zmw_moment_report_json(const struct ZmwShiftSet *a,
                                      const struct ZmwShiftSet *b,
                                      double big_t,
                                      uint64_t x,
                                      uint64_t prime_bound,
                                      char **json_out);

// Runs the random-draw identity suite. `passed` receives 1 when every
// identity met its tolerance.
enum ZmwStatus zmw_identities_json(uint64_t seed, uint64_t draws, int32_t *passed, char **json_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZMW_H */
