#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sgdlab/models/any_model.hpp"

namespace sgdlab {

// Sample moments of one SGD step from a fixed point x, over M fresh data.
struct DriftEstimate {
  SummaryVec point;
  std::vector<double> mean;     // E[du] / delta, estimates h
  std::vector<double> mean_se;
  Eigen::MatrixXd cov;          // Cov(du) / delta, estimates Sigma
  Eigen::MatrixXd cov_se;
  int samples = 0;
};

// `scale` multiplies each summary coordinate before differencing (e.g. sqrt(n)
// for a rescaled coordinate); empty means 1.
DriftEstimate estimate_one_step(const AnyModel& model, const ParamPoint& x, double delta, int M,
                                RngStream& rng, std::span<const double> scale = {});

}  // namespace sgdlab
