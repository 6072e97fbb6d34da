#include "sgdlab/core/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace sgdlab::simd {

#if defined(SGDLAB_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
void axpby(double a, const double* x, double b, double* y, std::size_t n);
void update3(double c0, double* y, double c1, const double* p, double c2, const double* q,
             std::size_t n);
}  // namespace avx2
#endif

const Kernels* avx2_kernels() {
#if defined(SGDLAB_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const Kernels k{Isa::avx2, avx2::dot, avx2::sum_sq, avx2::axpby, avx2::update3};
  return ok ? &k : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active() {
  static const Kernels& chosen = [] () -> const Kernels& {
    const char* env = std::getenv("SGDLAB_SIMD");
    if (env && std::string_view(env) == "scalar") return scalar_kernels();
    if (const Kernels* k = avx2_kernels()) return *k;
    return scalar_kernels();
  }();
  return chosen;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace sgdlab::simd
