#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "sgdlab/core/linalg.hpp"
#include "sgdlab/core/rng.hpp"
#include "sgdlab/core/summary.hpp"
#include "sgdlab/core/trajectory.hpp"

namespace sgdlab {

using VectorField = std::function<void(std::span<const double> u, std::span<double> out)>;
using FactorField = std::function<Eigen::MatrixXd(std::span<const double> u)>;

// du = rhs(u) dt
struct OdeSystem {
  Schema schema;
  VectorField rhs;
};

// du = drift(u) dt + factor(u) dB, with factor(u) factor(u)^T the diffusion matrix.
struct SdeSystem {
  Schema schema;
  VectorField drift;
  FactorField diffusion_factor;
};

SummaryVec evaluate(const OdeSystem& sys, const SummaryVec& u);
SummaryVec evaluate_drift(const SdeSystem& sys, const SummaryVec& u);
Eigen::MatrixXd diffusion_matrix(const SdeSystem& sys, const SummaryVec& u);

inline constexpr double kDefaultOdeStep = 1e-3;
inline constexpr double kDefaultSdeStep = 1e-3;

// Classical RK4 with a fixed step; the last step is shortened to land on T.
Trajectory rk4_integrate(const OdeSystem& sys, const SummaryVec& u0, double T,
                         double h = kDefaultOdeStep, std::int64_t record_stride = 1);

Trajectory euler_maruyama(const SdeSystem& sys, const SummaryVec& u0, double T, RngStream& rng,
                          double h = kDefaultSdeStep, std::int64_t record_stride = 1);

}  // namespace sgdlab
