#include "sgdlab/limits/systems.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

namespace {

void check_finite(std::span<const double> x, double t, std::int64_t step, const char* what) {
  for (double v : x)
    if (!std::isfinite(v))
      throw DivergenceError(fmt::format("{} produced a non-finite value at t={}", what, t), step, t);
}

// Step count and whether the last step is a shortened one.
std::int64_t step_count(double T, double h) {
  if (!(h > 0)) throw DomainError("step size must be positive");
  if (!(T > 0)) throw DomainError("horizon must be positive");
  const double q = T / h;
  auto n = static_cast<std::int64_t>(std::floor(q));
  if (T - static_cast<double>(n) * h > 1e-12 * T) ++n;
  return std::max<std::int64_t>(n, 1);
}

}  // namespace

Trajectory rk4_integrate(const OdeSystem& sys, const SummaryVec& u0, double T, double h,
                         std::int64_t record_stride) {
  require_same_schema(sys.schema, u0.schema(), "rk4_integrate");
  if (record_stride < 1) throw DomainError("record_stride must be >= 1");
  const std::int64_t n = step_count(T, h);
  const std::size_t d = u0.size();
  std::vector<double> u(u0.values()), k1(d), k2(d), k3(d), k4(d), tmp(d);
  Trajectory traj(sys.schema);
  traj.reserve(static_cast<std::size_t>(n / record_stride + 2));
  traj.append(0.0, u);
  for (std::int64_t s = 1; s <= n; ++s) {
    const double t0 = static_cast<double>(s - 1) * h;
    const double t1 = s == n ? T : static_cast<double>(s) * h;
    const double dt = t1 - t0;
    sys.rhs(u, k1);
    for (std::size_t j = 0; j < d; ++j) tmp[j] = u[j] + 0.5 * dt * k1[j];
    sys.rhs(tmp, k2);
    for (std::size_t j = 0; j < d; ++j) tmp[j] = u[j] + 0.5 * dt * k2[j];
    sys.rhs(tmp, k3);
    for (std::size_t j = 0; j < d; ++j) tmp[j] = u[j] + dt * k3[j];
    sys.rhs(tmp, k4);
    for (std::size_t j = 0; j < d; ++j) u[j] += dt / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    check_finite(u, t1, s, "rk4");
    if (s % record_stride == 0 || s == n) traj.append(t1, u);
  }
  return traj;
}

Trajectory euler_maruyama(const SdeSystem& sys, const SummaryVec& u0, double T, RngStream& rng,
                          double h, std::int64_t record_stride) {
  require_same_schema(sys.schema, u0.schema(), "euler_maruyama");
  if (record_stride < 1) throw DomainError("record_stride must be >= 1");
  const std::int64_t n = step_count(T, h);
  const std::size_t d = u0.size();
  std::vector<double> u(u0.values()), drift(d);
  Eigen::VectorXd xi(static_cast<Eigen::Index>(d));
  Trajectory traj(sys.schema);
  traj.reserve(static_cast<std::size_t>(n / record_stride + 2));
  traj.append(0.0, u);
  for (std::int64_t s = 1; s <= n; ++s) {
    const double t0 = static_cast<double>(s - 1) * h;
    const double t1 = s == n ? T : static_cast<double>(s) * h;
    const double dt = t1 - t0;
    sys.drift(u, drift);
    const Eigen::MatrixXd f = sys.diffusion_factor(u);
    rng.fill_normal(std::span<double>(xi.data(), d));
    const Eigen::VectorXd noise = f * xi * std::sqrt(dt);
    for (std::size_t j = 0; j < d; ++j) u[j] += drift[j] * dt + noise[static_cast<Eigen::Index>(j)];
    check_finite(u, t1, s, "euler_maruyama");
    if (s % record_stride == 0 || s == n) traj.append(t1, u);
  }
  return traj;
}

}  // namespace sgdlab
