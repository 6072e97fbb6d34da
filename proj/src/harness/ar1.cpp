#include "sgdlab/harness/ar1.hpp"

#include <algorithm>
#include <cmath>

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

namespace {

Ar1Fit fit(const std::vector<std::span<const double>>& all, double delta) {
  if (!(delta > 0)) throw DomainError("delta must be positive");
  double sxx = 0, sxy = 0;
  std::size_t pairs = 0, length = 0;
  for (auto x : all) {
    if (x.size() < 100) throw RangeError("fit_ar1 needs at least 100 points per series");
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) throw DegenerateFitError("fit_ar1: series is constant");
    for (std::size_t l = 0; l + 1 < x.size(); ++l) {
      sxx += x[l] * x[l];
      sxy += x[l] * x[l + 1];
    }
    pairs += x.size() - 1;
    length += x.size();
  }
  if (sxx == 0) throw DegenerateFitError("fit_ar1: regressor is identically zero");
  Ar1Fit f;
  f.length = length;
  f.rho = sxy / sxx;
  double ss = 0;
  for (auto x : all)
    for (std::size_t l = 0; l + 1 < x.size(); ++l) {
      const double e = x[l + 1] - f.rho * x[l];
      ss += e * e;
    }
  const double dof = static_cast<double>(pairs - 1);
  f.innovation_var = ss / dof;
  f.rho_se = std::sqrt(f.innovation_var / sxx);
  f.drift = (f.rho - 1) / delta;
  f.drift_se = f.rho_se / delta;
  f.volatility = std::sqrt(f.innovation_var / delta);
  return f;
}

}  // namespace

Ar1Fit fit_ar1(std::span<const double> x, double delta) { return fit({x}, delta); }

Ar1Fit fit_ar1_pooled(const std::vector<std::vector<double>>& series, double delta) {
  if (series.empty()) throw RangeError("fit_ar1_pooled needs at least one series");
  std::vector<std::span<const double>> all(series.begin(), series.end());
  return fit(all, delta);
}

}  // namespace sgdlab
