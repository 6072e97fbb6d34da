#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sgdlab {

// x_{l+1} = rho x_l + e_l by least squares without intercept.
struct Ar1Fit {
  double rho = 0;
  double rho_se = 0;
  double drift = 0;  // (rho - 1) / delta
  double drift_se = 0;
  double innovation_var = 0;
  double volatility = 0;  // sqrt(innovation_var / delta)
  std::size_t length = 0;
};

Ar1Fit fit_ar1(std::span<const double> series, double delta);
// One rho shared by independent series; sums the normal equations.
Ar1Fit fit_ar1_pooled(const std::vector<std::vector<double>>& series, double delta);

}  // namespace sgdlab
