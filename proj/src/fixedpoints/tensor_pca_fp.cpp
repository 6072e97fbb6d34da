#include <cmath>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/fixedpoints/fixed_points.hpp"
#include "sgdlab/limits/tensor_pca_limits.hpp"

namespace sgdlab {

double tensor_pca_lambda_c(int k, double c_delta) {
  if (k < 2) throw DomainError("tensor order k must be >= 2");
  const double base = std::pow(c_delta / k, k / 2.0) * std::pow(2.0 * k - 2.0, k - 1);
  if (k == 2) return base;  // 0^0 = 1
  return base / std::pow(k - 2.0, (k - 2) / 2.0);
}

double tensor_pca_psi(double rho, int k, double lambda, double c_delta) {
  const double p = 2.0 * (k - 1) / (k - 2);
  return std::pow(lambda, -2.0 / (k - 2)) * std::pow(rho, p) - rho + c_delta;
}

namespace {

double bisect(double lo, double hi, int k, double lambda, double c) {
  double flo = tensor_pca_psi(lo, k, lambda, c);
  for (int it = 0; it < 400 && hi - lo > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = tensor_pca_psi(mid, k, lambda, c);
    if (fm == 0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  const double flo2 = std::abs(tensor_pca_psi(lo, k, lambda, c));
  const double fhi2 = std::abs(tensor_pca_psi(hi, k, lambda, c));
  return flo2 <= fhi2 ? lo : hi;
}

FixedPointRecord point(std::string label, Stability s, double m, double r2) {
  FixedPointRecord r;
  r.label = std::move(label);
  r.stability = s;
  r.schema = Schema{"m", "r2"};
  r.pieces.push_back(RingPiece{{m, r2}, {}, 0, 0});
  r.kind = "point";
  return r;
}

std::string sgn(double s) { return s > 0 ? "+" : "-"; }

}  // namespace

std::vector<FixedPointRecord> tensor_pca_fixed_points(int k, double lambda, double c) {
  if (k < 2) throw DomainError("tensor order k must be >= 2");
  if (!(lambda > 0)) throw DomainError("lambda must be positive");
  if (!(c > 0)) throw DomainError("c_delta must be positive");
  const double lc = tensor_pca_lambda_c(k, c);
  std::vector<FixedPointRecord> out;
  out.push_back(point("unstable:(0,0)", Stability::unstable, 0, 0));
  const bool origin_stable = k > 2 || lambda <= lc;
  out.push_back(point(fmt::format("{}:(0,{:g})", stability_name(origin_stable ? Stability::stable : Stability::unstable), c),
                      origin_stable ? Stability::stable : Stability::unstable, 0, c));
  const std::vector<double> signs = k % 2 == 0 ? std::vector<double>{1.0, -1.0} : std::vector<double>{1.0};
  if (k == 2) {
    if (lambda > lc) {
      const double m = std::sqrt(lambda - c);
      for (double s : signs) out.push_back(point(sgn(s) == "+" ? "stable:+m_star" : "stable:-m_star", Stability::stable, s * m, c));
    }
  } else {
    const double p = 2.0 * (k - 1) / (k - 2);
    const double rho_min = std::pow(lambda, 2.0 / k) * std::pow(p, -(k - 2.0) / k);
    if (rho_min > c && tensor_pca_psi(rho_min, k, lambda, c) < 0) {
      double rho_max = 2.0 * rho_min;
      while (tensor_pca_psi(rho_max, k, lambda, c) <= 0) rho_max *= 2.0;
      const double rd = bisect(c, rho_min, k, lambda, c);
      const double rs = bisect(rho_min, rho_max, k, lambda, c);
      const double md = std::sqrt(rd - c), ms = std::sqrt(rs - c);
      for (double s : signs) {
        out.push_back(point(fmt::format("unstable:{}m_dagger", sgn(s)), Stability::unstable, s * md, c));
        out.push_back(point(fmt::format("stable:{}m_star", sgn(s)), Stability::stable, s * ms, c));
      }
    }
  }
  const OdeSystem sys = tensor_pca_ballistic({k, lambda, c, 0.0});
  RngStream rng(0, 0);
  for (auto& r : out) r.residual = max_residual(r, sys, rng);
  return out;
}

}  // namespace sgdlab
