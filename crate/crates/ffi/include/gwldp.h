#ifndef GWLDP_H
#define GWLDP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum GwldpStatus {
  GWLDP_STATUS_OK = 0,
  GWLDP_STATUS_NULL_POINTER = 1,
  GWLDP_STATUS_INVALID_UTF8 = 2,
  // The JSON configuration was malformed or named unknown fields/types.
  GWLDP_STATUS_CONFIG = 3,
  // The model was rejected (not critical, not weakly irreducible, ...).
  GWLDP_STATUS_INVALID_MODEL = 4,
  // An argument was out of range or the operation does not apply.
  GWLDP_STATUS_INVALID_ARGUMENT = 5,
  // The conditioning event has probability zero.
  GWLDP_STATUS_NULL_CONDITIONING = 6,
  // A numerical routine failed to converge or certify its result.
  GWLDP_STATUS_NUMERICAL = 7,
  // An output buffer was too small.
  GWLDP_STATUS_BUFFER_TOO_SMALL = 8,
  // An internal panic was caught at the boundary.
  GWLDP_STATUS_PANIC = 9,
} GwldpStatus;

// Opaque model handle.
typedef struct GwldpModel GwldpModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread (empty after a success).
// The pointer stays valid until the next call into this library on the
// same thread.
const char *gwldp_last_error(void);

// Build a model from a NUL-terminated JSON configuration.
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum GwldpStatus gwldp_model_from_json(const char *json, struct GwldpModel **out);

// Release a model. Null is ignored.
//
// # Safety
// `model` must come from [`gwldp_model_from_json`] and not be used again.
void gwldp_model_free(struct GwldpModel *model);

// Number of types of the model.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum GwldpStatus gwldp_model_num_types(const struct GwldpModel *model, size_t *out);

// Perron root of the mean matrix.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum GwldpStatus gwldp_model_rho(const struct GwldpModel *model, double *out);

// Write `log P{|T| = n}` for `n = 1..=n_max` into `out[0..n_max]`
// (`-inf` where the probability is zero).
//
// # Safety
// `model` must be a live handle and `out` must hold `len` doubles.
enum GwldpStatus gwldp_size_law(const struct GwldpModel *model,
                                size_t n_max,
                                double *out,
                                size_t len);

// Cramér rate of the offspring-number law at `x` (product models only).
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum GwldpStatus gwldp_cramer_rate(const struct GwldpModel *model, double x, double *out);

// Pair rate of the measure `mass` (row-major `K x K`, parent first) for a
// product model; `+inf` outside the effective domain.
//
// # Safety
// `model` must be a live handle, `mass` must hold `len` doubles and `out`
// must be a valid pointer.
enum GwldpStatus gwldp_pair_rate(const struct GwldpModel *model,
                                 const double *mass,
                                 size_t len,
                                 double *out);

// Draw one tree conditioned on `|T| = n` and return it rendered as text,
// e.g. `a(b,a(b,b))`. Release the string with [`gwldp_string_free`].
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum GwldpStatus gwldp_sample_tree(const struct GwldpModel *model,
                                   size_t n,
                                   uint64_t seed,
                                   char **out);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used again.
void gwldp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GWLDP_H */
