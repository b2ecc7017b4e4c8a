#include <math.h>
#include <stdio.h>
#include "hillmap.h"

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "line %d: %s\n", __LINE__, #cond);         \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  HmPotential *v = NULL;
  CHECK(hm_potential_free_new(&v) == HM_STATUS_OK);
  double trace = 0.0;
  CHECK(hm_discriminant(v, 1.0, 1.0, &trace) == HM_STATUS_OK);
  CHECK(fabs(trace - 2.0 * cos(1.0)) < 1e-8);

  HmBandList *bands = NULL;
  CHECK(hm_bands_compute(v, 1.0, 40.0, &bands) == HM_STATUS_OK);
  size_t n = 0;
  CHECK(hm_bands_len(bands, &n) == HM_STATUS_OK && n == 3);
  double lo, hi;
  CHECK(hm_bands_get(bands, 3, &lo, &hi) == HM_STATUS_INVALID_ARGUMENT);
  char msg[128];
  CHECK(hm_last_error_message(msg, sizeof msg) > 0);
  hm_bands_free(bands);
  hm_potential_free(v);

  double c[4];
  size_t written = 0;
  CHECK(hm_gen_logistic_coeffs(3, c, 4, &written) == HM_STATUS_OK && written == 4);
  CHECK(c[0] == 1.0 && c[2] == -3.0);

  CHECK(hm_potential_free_new(NULL) == HM_STATUS_NULL_POINTER);
  printf("ok %s\n", hm_version());
  return 0;
}
