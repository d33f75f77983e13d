#include <math.h>
#include <stdio.h>
#include "lhg.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    enum LhgStatus st_ = (call);                                           \
    if (st_ != LHG_STATUS_OK) {                                            \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_, lhg_last_error()); \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  double v = 0.0;
  CHECK(lhg_laguerre_function(5, 1.0, 0.0, &v));
  if (fabs(v - 1.0) > 1e-13) return 2;

  double re = 0.0, im = 0.0;
  CHECK(lhg_bessel_j(0.5, 3.0, 0.0, &re, &im));
  if (fabs(re - sqrt(2.0 / (M_PI * 3.0)) * sin(3.0)) > 1e-13) return 3;

  if (lhg_laguerre_function(1, -2.0, 1.0, &v) != LHG_STATUS_INVALID_ARGUMENT) return 4;
  if (lhg_last_error() == NULL) return 5;

  LhgGridFunction *f = NULL;
  CHECK(lhg_fixture_bump(0.0, 1.0, &f));
  size_t n_x = 0, n_t = 0;
  double alpha = -1.0;
  CHECK(lhg_grid_function_shape(f, &alpha, &n_x, &n_t));
  if (n_x == 0 || n_t == 0 || alpha != 0.0) return 6;

  double norm_f = 0.0, norm_hat = 0.0;
  CHECK(lhg_plancherel_norms(f, 48, 30.0, &norm_f, &norm_hat));
  if (fabs(norm_f - norm_hat) > 1e-3 * norm_f) return 7;

  lhg_grid_function_free(f);
  lhg_grid_function_free(NULL);
  printf("ok %s\n", lhg_version());
  return 0;
}
