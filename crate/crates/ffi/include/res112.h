#ifndef RES112_H
#define RES112_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Length of the count array filled by [`res112_fiber_counts`].
 */
#define RES112_COMPONENT_KINDS 7

typedef enum Res112Status {
  RES112_STATUS_OK = 0,
  RES112_STATUS_NULL_POINTER = 1,
  RES112_STATUS_INVALID = 2,
  RES112_STATUS_UNSUPPORTED = 3,
  RES112_STATUS_NUMERICAL = 4,
  RES112_STATUS_PANIC = 5,
} Res112Status;

/**
 * Component kinds, in the order used by the count array of
 * [`res112_fiber_counts`].
 */
typedef enum Res112Component {
  RES112_COMPONENT_POINT = 0,
  RES112_COMPONENT_CIRCLE = 1,
  RES112_COMPONENT_TORUS2 = 2,
  RES112_COMPONENT_TORUS3 = 3,
  RES112_COMPONENT_PINCHED_TORUS_TIMES_T1 = 4,
  RES112_COMPONENT_FIGURE_EIGHT_TIMES_T2 = 5,
  RES112_COMPONENT_CUSP_PINCHED_T3 = 6,
} Res112Component;

/**
 * Opaque model handle.
 */
typedef struct Res112Model Res112Model;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *res112_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the length the full message needs, including
 * the NUL, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t res112_last_error(char *buf, size_t len);

/**
 * Creates a model with detuning λ = delta + lambda1·μ + lambda2·ℓ and
 * quadratic coefficient `kappa`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum Res112Status res112_model_new(double delta,
                                   double kappa,
                                   double lambda1,
                                   double lambda2,
                                   struct Res112Model **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from [`res112_model_new`] and not be used afterwards.
 */
void res112_model_free(struct Res112Model *model);

/**
 * Detuning λ at (μ, ℓ).
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum Res112Status res112_detuning(const struct Res112Model *model,
                                  double mu,
                                  double ell,
                                  double *out);

/**
 * Minimum of the reduced Hamiltonian over the reduced space at (μ, ℓ).
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum Res112Status res112_h_min(const struct Res112Model *model, double mu, double ell, double *out);

/**
 * Counts the fiber components over (μ, ℓ, h) by kind. `counts` receives
 * [`RES112_COMPONENT_KINDS`] entries indexed by [`Res112Component`];
 * `flagged` (optional) is set when a root sits in the ambiguity band.
 *
 * # Safety
 * `model` must be a live handle, `counts` must hold
 * [`RES112_COMPONENT_KINDS`] writable entries, `flagged` null or writable.
 */
enum Res112Status res112_fiber_counts(const struct Res112Model *model,
                                      double mu,
                                      double ell,
                                      double h,
                                      uint32_t *counts,
                                      bool *flagged);

/**
 * Interval (lo, hi) of detunings λ where the tip at (μ, ℓ) is an unstable
 * equilibrium. `exists` is false for a smooth tip, and lo/hi are then left
 * untouched.
 *
 * # Safety
 * `lo`, `hi` and `exists` must be writable.
 */
enum Res112Status res112_instability_interval(double kappa,
                                              double mu,
                                              double ell,
                                              double *lo,
                                              double *hi,
                                              bool *exists);

/**
 * Monodromy vector (m_N, m_J) along generator `generator` (1, 2 or 3),
 * sampled at `points` loop points.
 *
 * # Safety
 * `model` must be a live handle, `m_n` and `m_j` writable.
 */
enum Res112Status res112_monodromy_generator(const struct Res112Model *model,
                                             uint32_t generator,
                                             uint32_t points,
                                             int64_t *m_n,
                                             int64_t *m_j);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RES112_H */
