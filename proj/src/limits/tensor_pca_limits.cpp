#include "sgdlab/limits/tensor_pca_limits.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

namespace {

double ipow(double x, int p) {
  double r = 1;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

void ballistic(const TensorPcaLimitParams& p, std::span<const double> u, std::span<double> out) {
  const double m = u[0], r2 = u[1];
  if (r2 < 0) throw DomainError(fmt::format("r2 = {} is negative", r2));
  const int k = p.k;
  const double R2 = m * m + r2;
  const double Rk = ipow(R2, k - 1);  // R^{2(k-1)}
  out[0] = 2.0 * m * (p.lambda * k * ipow(m, k - 2) - k * Rk - p.alpha);
  out[1] = -(4.0 * r2 - 4.0 * p.c_delta) * k * Rk - 2.0 * p.alpha * r2;
}

void check_k(int k) {
  if (k < 2) throw DomainError("tensor order k must be >= 2");
}

}  // namespace

SummaryVec tensor_pca_ballistic_rhs(const SummaryVec& u, const TensorPcaLimitParams& p) {
  return evaluate(tensor_pca_ballistic(p), u);
}

OdeSystem tensor_pca_ballistic(const TensorPcaLimitParams& p) {
  check_k(p.k);
  return {Schema{"m", "r2"}, [p](std::span<const double> u, std::span<double> out) { ballistic(p, u, out); }};
}

Schema tensor_pca_loss_schema() {
  static const Schema s{"m", "r2", "Phi"};
  return s;
}

SummaryVec tensor_pca_loss_rhs(const SummaryVec& u, int k, double lambda, double c_delta) {
  return evaluate(tensor_pca_loss(k, lambda, c_delta), u);
}

OdeSystem tensor_pca_loss(int k, double lambda, double c_delta) {
  check_k(k);
  TensorPcaLimitParams p{k, lambda, c_delta, 0.0};
  return {tensor_pca_loss_schema(), [p](std::span<const double> u, std::span<double> out) {
            ballistic(p, u, out);
            const double m = u[0], r2 = u[1];
            const double R2 = m * m + r2;
            const double Rk = ipow(R2, p.k - 1);
            const double mk = ipow(m, p.k - 2);
            const double kk = static_cast<double>(p.k) * p.k;
            out[2] = -4.0 * kk * m * m * (p.lambda * p.lambda * mk * mk - 2.0 * p.lambda * mk * Rk + Rk * Rk) -
                     4.0 * kk * Rk * Rk * (r2 - p.c_delta);
          }};
}

Schema tensor_pca_diffusive_schema() {
  static const Schema s{"mt", "r2"};
  return s;
}

SdeSystem tensor_pca_diffusive(int k, double lambda, std::optional<double> Lambda) {
  check_k(k);
  if (Lambda && k == 2) throw ConfigError("the Lambda scaling mode needs k >= 3");
  // Signal coefficient inside 2 mt (coef - k r^{2(k-1)}).
  const double coef = Lambda ? k * *Lambda : (k == 2 ? 2.0 * lambda : 0.0);
  SdeSystem sys;
  sys.schema = tensor_pca_diffusive_schema();
  sys.drift = [k, coef](std::span<const double> u, std::span<double> out) {
    const double r2 = u[1];
    if (r2 < 0) throw DomainError(fmt::format("r2 = {} is negative", r2));
    const double rk = ipow(r2, k - 1);
    out[0] = 2.0 * u[0] * (coef - k * rk);
    out[1] = -4.0 * k * rk * (r2 - 1.0);
  };
  sys.diffusion_factor = [k](std::span<const double> u) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2, 2);
    f(0, 0) = 2.0 * std::sqrt(k * ipow(std::max(u[1], 0.0), k - 1));
    return f;
  };
  return sys;
}

Schema tensor_pca_double_diffusive_schema() {
  static const Schema s{"mt", "rt"};
  return s;
}

SdeSystem tensor_pca_double_diffusive(int k, double lambda) {
  check_k(k);
  const double lam = k == 2 ? lambda : 0.0;
  SdeSystem sys;
  sys.schema = tensor_pca_double_diffusive_schema();
  sys.drift = [k, lam](std::span<const double> u, std::span<double> out) {
    out[0] = 2.0 * k * (lam * ipow(u[0], k - 1) - u[0]);
    out[1] = -4.0 * k * u[1];
  };
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2, 2);
  f(0, 0) = 2.0 * std::sqrt(static_cast<double>(k));
  f(1, 1) = 2.0 * std::sqrt(static_cast<double>(k) * (k - 1));
  sys.diffusion_factor = [f](std::span<const double>) { return f; };
  return sys;
}

}  // namespace sgdlab
