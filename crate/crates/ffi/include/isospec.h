#ifndef ISOSPEC_H
#define ISOSPEC_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IsospecStatus {
  ISOSPEC_STATUS_OK = 0,
  ISOSPEC_STATUS_NULL_POINTER = 1,
  /**
   * The request is outside the operation's domain.
   */
  ISOSPEC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A well-posed computation failed to converge.
   */
  ISOSPEC_STATUS_NUMERICAL_FAILURE = 3,
  ISOSPEC_STATUS_PANIC = 4,
} IsospecStatus;

/**
 * Invariant circle handle; remembers nothing about its curve.
 */
typedef struct IsospecCircle IsospecCircle;

/**
 * Boundary curve handle.
 */
typedef struct IsospecCurve IsospecCurve;

typedef struct IsospecAction {
  double i0;
  double l0;
  double grad_l;
  double a_avg;
  /**
   * L0 − I0·gradL − A_avg
   */
  double identity_gap;
} IsospecAction;

/**
 * Normal-form data of one circle. `higher_jets` may be NULL when
 * `n_jets` is 0.
 */
typedef struct IsospecBirkhoff {
  double i0;
  double omega;
  double l0;
  double hess_l;
  const double *higher_jets;
  uintptr_t n_jets;
  int64_t maslov_theta0;
  int64_t maslov_theta;
} IsospecBirkhoff;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *isospec_version(void);

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *isospec_last_error(void);

/**
 * Build a curve from a domain spec such as `{"type":"ellipse","a":2,"b":1}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum IsospecStatus isospec_curve_from_json(const char *json, struct IsospecCurve **out);

/**
 * # Safety
 * `out` must be a writable pointer.
 */
enum IsospecStatus isospec_curve_circle(double r, struct IsospecCurve **out);

/**
 * # Safety
 * `out` must be a writable pointer.
 */
enum IsospecStatus isospec_curve_ellipse(double a, double b, struct IsospecCurve **out);

/**
 * # Safety
 * `curve` must be NULL or a handle from this library not yet freed.
 */
void isospec_curve_free(struct IsospecCurve *curve);

/**
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum IsospecStatus isospec_curve_total_length(const struct IsospecCurve *curve, double *out);

/**
 * Boundary point at arclength s.
 *
 * # Safety
 * `curve` must be a live handle; `x` and `y` writable.
 */
enum IsospecStatus isospec_curve_position(const struct IsospecCurve *curve,
                                          double s,
                                          double *x,
                                          double *y);

/**
 * One reflection (s, ξ) ↦ (s', ξ'); `chord_length` may be NULL.
 *
 * # Safety
 * `curve` must be a live handle; `s_out` and `xi_out` writable.
 */
enum IsospecStatus isospec_billiard_map(const struct IsospecCurve *curve,
                                        double s,
                                        double xi,
                                        double *s_out,
                                        double *xi_out,
                                        double *chord_length);

/**
 * Invariant circle of B^period through (s, ξ) with `n_modes` Fourier modes.
 * Disks use the closed form when period is 1.
 *
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum IsospecStatus isospec_circle_fit(const struct IsospecCurve *curve,
                                      double s,
                                      double xi,
                                      uintptr_t n_modes,
                                      uintptr_t period,
                                      struct IsospecCircle **out);

/**
 * # Safety
 * `circle` must be NULL or a handle from this library not yet freed.
 */
void isospec_circle_free(struct IsospecCircle *circle);

/**
 * Orbit rotation number ρ ∈ [0, 1).
 *
 * # Safety
 * `circle` must be a live handle and `rho` writable.
 */
enum IsospecStatus isospec_circle_rotation(const struct IsospecCircle *circle, double *rho);

/**
 * # Safety
 * `curve` and `circle` must be live handles, the circle fitted on the curve;
 * `out` writable.
 */
enum IsospecStatus isospec_circle_action(const struct IsospecCurve *curve,
                                         const struct IsospecCircle *circle,
                                         struct IsospecAction *out);

/**
 * ∫_Λ K/sinθ dμ for K(t) = Σ_n cos_coeffs[n] cos(nt) + sin_coeffs[n] sin(nt)
 * in the curve parameter t. `sin_coeffs` may be NULL.
 *
 * # Safety
 * Handles must be live; `cos_coeffs` (and `sin_coeffs` when non-NULL) must
 * hold `n` doubles; `out` writable.
 */
enum IsospecStatus isospec_torus_invariant(const struct IsospecCurve *curve,
                                           const struct IsospecCircle *circle,
                                           const double *cos_coeffs,
                                           const double *sin_coeffs,
                                           uintptr_t n,
                                           double *out);

/**
 * Witnessed Diophantine constant κ̂ over 0 < |k| ≤ k_max.
 *
 * # Safety
 * `omega` must hold `dim` doubles and `kappa` be writable.
 */
enum IsospecStatus isospec_diophantine_kappa(const double *omega,
                                             uintptr_t dim,
                                             double tau,
                                             uint32_t k_max,
                                             double *kappa);

/**
 * Quasi-eigenvalue recursion of order M for q = (k, k_n). Writes c_0..c_M
 * into `c_out` (M + 1 doubles), b_0..b_{M+1} into `b_out` (M + 2 doubles,
 * may be NULL) and μ_q into `mu_out`.
 *
 * # Safety
 * `data` must be valid with `higher_jets` holding `n_jets` doubles; output
 * buffers must have the stated sizes.
 */
enum IsospecStatus isospec_quasi_recursion(const struct IsospecBirkhoff *data,
                                           int64_t k,
                                           int64_t k_n,
                                           double mu0,
                                           uintptr_t order,
                                           double *c_out,
                                           double *b_out,
                                           double *mu_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOSPEC_H */
