#include <stddef.h>

void matscale(size_t n, double A[n][n], double s) {
  /*@loop:i*/
  for (size_t i = 0; i < n; ++i) {
    /*@loop:j*/
    for (size_t j = 0; j < n; ++j)
      A[i][j] *= s;
  }
}
