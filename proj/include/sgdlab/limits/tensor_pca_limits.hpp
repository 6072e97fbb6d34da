#pragma once

#include <optional>

#include "sgdlab/limits/systems.hpp"

namespace sgdlab {

struct TensorPcaLimitParams {
  int k = 2;
  double lambda = 1;
  double c_delta = 1;
  double alpha = 0;
};

// Ballistic field over (m, r2).
SummaryVec tensor_pca_ballistic_rhs(const SummaryVec& u, const TensorPcaLimitParams& p);
OdeSystem tensor_pca_ballistic(const TensorPcaLimitParams& p);

// Same field augmented with the population loss coordinate: (m, r2, Phi). alpha = 0.
Schema tensor_pca_loss_schema();
SummaryVec tensor_pca_loss_rhs(const SummaryVec& u, int k, double lambda, double c_delta);
OdeSystem tensor_pca_loss(int k, double lambda, double c_delta);

// Rescaled m~ = sqrt(n) m near m = 0, coordinates (mt, r2). With Lambda set
// (k >= 3 only) the signal enters as lambda_n = Lambda n^{(k-2)/2}.
Schema tensor_pca_diffusive_schema();
SdeSystem tensor_pca_diffusive(int k, double lambda, std::optional<double> Lambda = std::nullopt);

// Both coordinates rescaled around (0, 1): (mt, rt), independent noises.
Schema tensor_pca_double_diffusive_schema();
SdeSystem tensor_pca_double_diffusive(int k, double lambda);

}  // namespace sgdlab
