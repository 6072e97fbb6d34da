#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sgdlab/core/rng.hpp"
#include "sgdlab/core/summary.hpp"

namespace sgdlab {

struct McConfig {
  int samples = 100000;
  RngStream stream;
};

// Gaussian functionals of the network field at a summary point, with Monte
// Carlo standard errors. A_perp(i, j) = E[(X . W_j^perp) 1{W_i . X >= 0} (sigma - y)].
struct GmmExpectations {
  std::vector<double> A_mu, A_nu;
  Eigen::MatrixXd A_perp, B;
  std::vector<double> A_mu_se, A_nu_se;
  Eigen::MatrixXd A_perp_se, B_se;
};

// Reduced-dimension sampler. Draws its base normals once, so repeated
// evaluations share random numbers and the estimate is smooth in u.
// Samples come in antithetic pairs.
class GmmExpectationSampler {
 public:
  GmmExpectationSampler(int K, bool xor_means, int samples, RngStream& stream);

  int K() const { return K_; }
  int pairs() const { return pairs_; }

  // m_nu is ignored for the binary mixture. R must be PSD.
  GmmExpectations evaluate(std::span<const double> v, std::span<const double> m_mu,
                           std::span<const double> m_nu, const Eigen::MatrixXd& R,
                           double lambda) const;

 private:
  int K_;
  bool xor_;
  int pairs_;
  std::vector<double> base_;  // per pair: zeta_mu, zeta_nu, eta_1..eta_K
};

GmmExpectations bgmm_gaussian_expectations(const SummaryVec& u, double lambda, McConfig& mc);
GmmExpectations xor_gaussian_expectations(const SummaryVec& u, double lambda, McConfig& mc);

}  // namespace sgdlab
