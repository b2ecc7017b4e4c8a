#ifndef HILLMAP_H
#define HILLMAP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum HmStatus {
  HM_STATUS_OK = 0,
  HM_STATUS_NULL_POINTER = 1,
  HM_STATUS_DOMAIN = 2,
  HM_STATUS_INVALID_ARGUMENT = 3,
  HM_STATUS_CONFIG = 4,
  HM_STATUS_SINGULAR = 5,
  HM_STATUS_ESCAPE = 6,
  HM_STATUS_NON_CONVERGENCE = 7,
  HM_STATUS_BUFFER_TOO_SMALL = 8,
  HM_STATUS_PANIC = 9,
} HmStatus;

// Distribution of the initial ensemble.
typedef enum HmDistribution {
  // Γ(1,1) - 2, truncated to [-2, 2] by rejection.
  HM_DISTRIBUTION_SHIFTED_GAMMA = 0,
  // Uniform on [-2, 2].
  HM_DISTRIBUTION_UNIFORM = 1,
} HmDistribution;

// Spectral bands of a potential.
typedef struct HmBandList HmBandList;

// Result of a Monte Carlo convergence experiment.
typedef struct HmEnsembleReport HmEnsembleReport;

// A periodic potential.
typedef struct HmPotential HmPotential;

// A piecewise-constant density.
typedef struct HmStepDensity HmStepDensity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` as a
// NUL-terminated string, truncating to `cap` bytes. Returns the length of
// the full message, or 0 if there is none.
//
// # Safety
// `buf` must be valid for `cap` bytes or null with `cap == 0`.
size_t hm_last_error_message(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *hm_version(void);

// V = 0 with period 1.
//
// # Safety
// `result` must be a valid pointer.
enum HmStatus hm_potential_free_new(struct HmPotential **result);

// V = a with period 1.
//
// # Safety
// `result` must be a valid pointer.
enum HmStatus hm_potential_constant_new(double a, struct HmPotential **result);

// V = amplitude·cos(frequency·x) with period 2π/frequency.
//
// # Safety
// `result` must be a valid pointer.
enum HmStatus hm_potential_cosine_new(double amplitude,
                                      double frequency,
                                      struct HmPotential **result);

// V = cos(2πx) with period 1.
//
// # Safety
// `result` must be a valid pointer.
enum HmStatus hm_potential_mathieu_new(struct HmPotential **result);

// # Safety
// `p` must come from an `hm_potential_*_new` call and not be used afterwards.
void hm_potential_free(struct HmPotential *p);

// Monodromy over `[0, l]` at `lambda`, row-major into `entries[4]`.
//
// # Safety
// `v` must be a live handle and `entries` valid for 4 doubles.
enum HmStatus hm_monodromy(const struct HmPotential *v, double l, double lambda, double *entries);

// Δ_l(λ), the trace of the monodromy.
//
// # Safety
// `v` must be a live handle and `result` a valid pointer.
enum HmStatus hm_discriminant(const struct HmPotential *v, double l, double lambda, double *result);

// Bands of `v` below `lambda_max` for cell length `l`.
//
// # Safety
// `v` must be a live handle and `result` a valid pointer.
enum HmStatus hm_bands_compute(const struct HmPotential *v,
                               double l,
                               double lambda_max,
                               struct HmBandList **result);

// Number of bands.
//
// # Safety
// `b` must be a live handle and `len` a valid pointer.
enum HmStatus hm_bands_len(const struct HmBandList *b, size_t *len);

// Edges of band `index`.
//
// # Safety
// `b` must be a live handle; `lower` and `upper` valid pointers.
enum HmStatus hm_bands_get(const struct HmBandList *b, size_t index, double *lower, double *upper);

// # Safety
// `b` must come from [`hm_bands_compute`] and not be used afterwards.
void hm_bands_free(struct HmBandList *b);

// Step density with `n_values + 1` edges and `n_values` nonnegative values.
//
// # Safety
// `edges` must hold `n_values + 1` doubles, `values` `n_values`, and
// `result` must be a valid pointer.
enum HmStatus hm_step_density_new(const double *edges,
                                  const double *values,
                                  size_t n_values,
                                  struct HmStepDensity **result);

// # Safety
// `p` must be a live handle and `mass` a valid pointer.
enum HmStatus hm_step_density_mass(const struct HmStepDensity *p, double *mass);

// Number of cells.
//
// # Safety
// `p` must be a live handle and `len` a valid pointer.
enum HmStatus hm_step_density_len(const struct HmStepDensity *p, size_t *len);

// Copies the cell edges (one more than the cells) into `buf`.
//
// # Safety
// `p` must be a live handle, `buf` valid for `cap` doubles, `written` valid.
enum HmStatus hm_step_density_edges(const struct HmStepDensity *p,
                                    double *buf,
                                    size_t cap,
                                    size_t *written);

// Copies the cell values into `buf`.
//
// # Safety
// `p` must be a live handle, `buf` valid for `cap` doubles, `written` valid.
enum HmStatus hm_step_density_values(const struct HmStepDensity *p,
                                     double *buf,
                                     size_t cap,
                                     size_t *written);

// Image of `p` (on [0, 1]) under the tent map g_m; a new handle.
//
// # Safety
// `p` must be a live handle and `result` a valid pointer.
enum HmStatus hm_pushforward_tent(const struct HmStepDensity *p,
                                  uint32_t m,
                                  struct HmStepDensity **result);

// Image of `p` (on [0, ∞)) under the fold K_l; a new handle.
//
// # Safety
// `p` must be a live handle and `result` a valid pointer.
enum HmStatus hm_pushforward_fold(const struct HmStepDensity *p,
                                  uint32_t l,
                                  struct HmStepDensity **result);

// ∫|p - q| over a common domain.
//
// # Safety
// `p`, `q` must be live handles and `distance` a valid pointer.
enum HmStatus hm_l1_distance(const struct HmStepDensity *p,
                             const struct HmStepDensity *q,
                             double *distance);

// # Safety
// `p` must come from this library and not be used afterwards.
void hm_step_density_free(struct HmStepDensity *p);

// Iterates f_m over `n_samples` draws for `n_iters` steps.
//
// # Safety
// `result` must be a valid pointer.
enum HmStatus hm_ensemble_run(uint32_t m,
                              enum HmDistribution distribution,
                              size_t n_samples,
                              size_t n_iters,
                              uint64_t seed,
                              struct HmEnsembleReport **result);

// Wasserstein-1 distances for iterations `0..=n_iters`.
//
// # Safety
// `r` must be a live handle, `buf` valid for `cap` doubles, `written` valid.
enum HmStatus hm_ensemble_distances(const struct HmEnsembleReport *r,
                                    double *buf,
                                    size_t cap,
                                    size_t *written);

// Fitted slope of log W₁; `has_slope` is 0 when no fit was made.
//
// # Safety
// `r` must be a live handle; `slope` and `has_slope` valid pointers.
enum HmStatus hm_ensemble_slope(const struct HmEnsembleReport *r, double *slope, bool *has_slope);

// # Safety
// `r` must come from [`hm_ensemble_run`] and not be used afterwards.
void hm_ensemble_free(struct HmEnsembleReport *r);

// f_m(x) for x in [-2, 2].
//
// # Safety
// `result` must be a valid pointer.
enum HmStatus hm_gen_logistic(uint32_t m, double x, double *result);

// The m + 1 coefficients of f_m, highest degree first.
//
// # Safety
// `buf` must be valid for `cap` doubles and `written` a valid pointer.
enum HmStatus hm_gen_logistic_coeffs(uint32_t m, double *buf, size_t cap, size_t *written);

// ∫ log|f_m'| D over [-2, 2].
//
// # Safety
// `result` must be a valid pointer.
enum HmStatus hm_lyapunov_quadrature(uint32_t m, double *result);

// I(a) = (1/π) ∫ log|2 sin y - a| dy over [-π/2, π/2].
//
// # Safety
// `result` must be a valid pointer.
enum HmStatus hm_i_integral(double a, double *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HILLMAP_H */
