#include <bit>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/fixedpoints/fixed_points.hpp"

namespace sgdlab {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

std::string ExactProbability::str() const {
  return boost::multiprecision::numerator(value).str() + "/" +
         boost::multiprecision::denominator(value).str();
}

namespace {

ExactProbability make(cpp_rational v) { return {v, static_cast<double>(v)}; }

cpp_rational pow2(int e) {
  cpp_int one = 1;
  return e >= 0 ? cpp_rational(one << e) : cpp_rational(cpp_int(1), one << -e);
}

cpp_int binom(int n, int k) {
  cpp_int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

ExactProbability xor_success_probability(int K) {
  if (K < 4) throw DomainError("success probability needs K >= 4");
  cpp_rational sum = 0;
  for (int k = 2; k <= K - 2; ++k)
    sum += cpp_rational(binom(K, k)) * (1 - pow2(1 - k)) * (1 - pow2(1 + k - K));
  return make(sum / pow2(K));
}

// A run succeeds when the units with v > 0 carry both signs of m_mu and the
// units with v < 0 carry both signs of m_nu.
ExactProbability xor_success_probability_enumerated(int K) {
  if (K < 4) throw DomainError("success probability needs K >= 4");
  if (K > 16) throw DomainError("enumeration is limited to K <= 16");
  const std::uint32_t full = (1u << K) - 1;
  auto both_signs = [&](std::uint32_t set) {
    std::uint64_t n = 0;
    for (std::uint32_t m = 0; m <= full; ++m)
      if ((m & set) != 0 && (~m & set) != 0) ++n;
    return n;
  };
  cpp_int hits = 0;
  for (std::uint32_t v = 0; v <= full; ++v) hits += cpp_int(both_signs(v)) * both_signs(full & ~v);
  return make(cpp_rational(hits, cpp_int(1) << (3 * K)));
}

}  // namespace sgdlab
