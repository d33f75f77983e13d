#ifndef LHG_H
#define LHG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of [`lhg_miyachi_certificate`].
typedef enum LhgConclusion {
  LHG_CONCLUSION_MUST_VANISH = 0,
  LHG_CONCLUSION_HYPOTHESES_NOT_MET = 1,
  LHG_CONCLUSION_INCONCLUSIVE = 2,
} LhgConclusion;

// Status codes.
typedef enum LhgStatus {
  LHG_STATUS_OK = 0,
  // A required pointer was null.
  LHG_STATUS_NULL_ARGUMENT = 1,
  // A parameter is outside its domain, or an argument string is malformed.
  LHG_STATUS_INVALID_ARGUMENT = 2,
  // An index is past the end of a handle.
  LHG_STATUS_OUT_OF_BOUNDS = 3,
  // Grids do not fit together, or an argument leaves a grid.
  LHG_STATUS_GRID_MISMATCH = 4,
  // A quadrature, series or transform did not meet its accuracy test.
  LHG_STATUS_NUMERICAL = 5,
  // Reading or writing a file failed.
  LHG_STATUS_IO = 6,
  // The library panicked; this is a bug.
  LHG_STATUS_PANIC = 7,
} LhgStatus;

// Samples on a radial-by-time grid.
typedef struct LhgGridFunction LhgGridFunction;

// Coefficients on a frequency-by-degree grid.
typedef struct LhgSpectralFunction LhgSpectralFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null if there was none.
// The pointer stays valid until the next failing call on the same thread.
const char *lhg_last_error(void);

// Library version as a static NUL-terminated string.
const char *lhg_version(void);

// Normalized Laguerre function `L_m^alpha(x) e^{-x/2} / L_m^alpha(0)`.
//
// # Safety
// `out` must be valid for a write.
enum LhgStatus lhg_laguerre_function(size_t m, double alpha, double x, double *out);

// Bessel function `J_alpha(z)` of complex argument.
//
// # Safety
// `out_re` and `out_im` must be valid for writes.
enum LhgStatus lhg_bessel_j(double alpha, double z_re, double z_im, double *out_re, double *out_im);

// Heat kernel `h_s(x, t)` with multiplier exponent factor `kappa` (the
// calibrated value is 2).
//
// # Safety
// `out` must be valid for a write.
enum LhgStatus lhg_heat_kernel(double alpha,
                               double s,
                               double kappa,
                               double x,
                               double t,
                               double *out);

// Heat kernel `h_s` sampled on its default grids.
//
// # Safety
// `out` must be valid for a write.
enum LhgStatus lhg_fixture_heat_kernel(double alpha, double s, struct LhgGridFunction **out);

// Time-windowed basis function `psi_{lambda,m}` on its default grids.
//
// # Safety
// `out` must be valid for a write.
enum LhgStatus lhg_fixture_psi_packet(double alpha,
                                      double lambda,
                                      size_t m,
                                      double width,
                                      struct LhgGridFunction **out);

// Compact bump of the given radius on its default grids.
//
// # Safety
// `out` must be valid for a write.
enum LhgStatus lhg_fixture_bump(double alpha, double radius, struct LhgGridFunction **out);

// Reads a CSV+JSON pair (`path` may name either file or their stem).
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for a write.
enum LhgStatus lhg_grid_function_read(const char *path, struct LhgGridFunction **out);

// Writes `f` as `<stem>.csv` and `<stem>.json`.
//
// # Safety
// `f` must be a live handle and `stem` a NUL-terminated string.
enum LhgStatus lhg_grid_function_write(const struct LhgGridFunction *f, const char *stem);

// Order `alpha`, radial node count and time node count of `f`.
//
// # Safety
// `f` must be a live handle; the out-pointers must be valid for writes.
enum LhgStatus lhg_grid_function_shape(const struct LhgGridFunction *f,
                                       double *alpha,
                                       size_t *n_x,
                                       size_t *n_t);

// Node `(x_i, t_j)` and the sample there.
//
// # Safety
// `f` must be a live handle; the out-pointers must be valid for writes.
enum LhgStatus lhg_grid_function_sample(const struct LhgGridFunction *f,
                                        size_t i,
                                        size_t j,
                                        double *x,
                                        double *t,
                                        double *re,
                                        double *im);

// Releases a grid function; null is ignored.
//
// # Safety
// `f` must be null or a handle not yet freed.
void lhg_grid_function_free(struct LhgGridFunction *f);

// Forward Fourier-Laguerre transform on degrees `0..=m_max` and frequencies
// in `[-lambda_max, lambda_max]`.
//
// # Safety
// `f` must be a live handle and `out` valid for a write.
enum LhgStatus lhg_forward(const struct LhgGridFunction *f,
                           size_t m_max,
                           double lambda_max,
                           struct LhgSpectralFunction **out);

// Inverse transform of `fh` onto the grids of `like`.
//
// # Safety
// `fh` and `like` must be live handles and `out` valid for a write.
enum LhgStatus lhg_inverse(const struct LhgSpectralFunction *fh,
                           const struct LhgGridFunction *like,
                           struct LhgGridFunction **out);

// Frequency count and degree count (`m_max + 1`) of `fh`.
//
// # Safety
// `fh` must be a live handle; the out-pointers must be valid for writes.
enum LhgStatus lhg_spectral_function_shape(const struct LhgSpectralFunction *fh,
                                           size_t *n_lambda,
                                           size_t *n_m);

// Frequency node `lambda_l` and the coefficient at `(lambda_l, m)`.
//
// # Safety
// `fh` must be a live handle; the out-pointers must be valid for writes.
enum LhgStatus lhg_spectral_function_sample(const struct LhgSpectralFunction *fh,
                                            size_t l,
                                            size_t m,
                                            double *lambda,
                                            double *re,
                                            double *im);

// Releases a spectral function; null is ignored.
//
// # Safety
// `fh` must be null or a handle not yet freed.
void lhg_spectral_function_free(struct LhgSpectralFunction *fh);

// Both sides of the Plancherel identity for `f`.
//
// # Safety
// `f` must be a live handle; the out-pointers must be valid for writes.
enum LhgStatus lhg_plancherel_norms(const struct LhgGridFunction *f,
                                    size_t m_max,
                                    double lambda_max,
                                    double *grid_norm,
                                    double *spectral_norm);

// Uncertainty-principle certificate for `f` with decay rates `a`, `b`, the
// weight exponent `delta` and the Gaussian-estimate constant `big_a`, on the
// default frequency samples and radius ladder.
//
// # Safety
// `f` must be a live handle; the out-pointers must be valid for writes.
enum LhgStatus lhg_miyachi_certificate(const struct LhgGridFunction *f,
                                       double a,
                                       double b,
                                       double delta,
                                       double big_a,
                                       enum LhgConclusion *conclusion,
                                       double *residual_norm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LHG_H */
