#pragma once

#include <cstddef>

namespace sgdlab::simd {

enum class Isa { scalar, avx2 };

struct Kernels {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq)(const double* a, std::size_t n);
  // y = a*x + b*y
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  // y = c0*y + c1*p + c2*q
  void (*update3)(double c0, double* y, double c1, const double* p, double c2,
                  const double* q, std::size_t n);
};

const Kernels& scalar_kernels();
// nullptr when the binary was built without the AVX2 unit or the CPU lacks AVX2/FMA.
const Kernels* avx2_kernels();

// Chosen once per process: AVX2 when available unless SGDLAB_SIMD=scalar.
const Kernels& active();
const char* isa_name(Isa isa);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double sum_sq(const double* a, std::size_t n) { return active().sum_sq(a, n); }
inline void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  active().axpby(a, x, b, y, n);
}
inline void update3(double c0, double* y, double c1, const double* p, double c2, const double* q,
                    std::size_t n) {
  active().update3(c0, y, c1, p, c2, q, n);
}

}  // namespace sgdlab::simd
