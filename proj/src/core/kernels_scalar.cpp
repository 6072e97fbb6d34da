#include "sgdlab/core/kernels.hpp"

namespace sgdlab::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void update3_scalar(double c0, double* y, double c1, const double* p, double c2, const double* q,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = c0 * y[i] + c1 * p[i] + c2 * q[i];
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{Isa::scalar, dot_scalar, sum_sq_scalar, axpby_scalar, update3_scalar};
  return k;
}

}  // namespace sgdlab::simd
