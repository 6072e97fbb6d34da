#pragma once

#include <array>
#include <vector>

#include "sgdlab/limits/gaussian_expectations.hpp"
#include "sgdlab/limits/systems.hpp"

namespace sgdlab {

// Ring constants: -logit(2 alpha) for the binary mixture, -logit(4 alpha) for XOR.
double bgmm_c_alpha(double alpha);
double xor_c_alpha(double alpha);

struct RhsEstimate {
  SummaryVec h;
  std::vector<double> se;
};

// Finite-lambda fields h = -f + g with Monte Carlo functionals.
RhsEstimate bgmm_ballistic_rhs(const SummaryVec& u, double lambda, double alpha, double c_delta,
                               McConfig& mc);
// The sampler is built once from `mc`, so the field is deterministic and smooth.
OdeSystem bgmm_ballistic(double lambda, double alpha, double c_delta, McConfig mc);

RhsEstimate xor_ballistic_rhs(const SummaryVec& u, int K, double lambda, double alpha,
                              double c_delta, McConfig& mc);
OdeSystem xor_ballistic(int K, double lambda, double alpha, double c_delta, McConfig mc);

// lambda = infinity fields.
SummaryVec bgmm_ballistic_rhs_noiseless(const SummaryVec& u, double alpha);
OdeSystem bgmm_noiseless(double alpha);

// Branch selection for coordinates sitting exactly at zero: +1 reads as 0+,
// -1 as 0-, 0 uses the limiting value (no contribution). Empty means all 0.
struct XorSignTags {
  std::vector<int> mu;
  std::vector<int> nu;
};
XorSignTags random_sign_tags(int K, RngStream& rng);

SummaryVec xor_ballistic_rhs_noiseless(const SummaryVec& u, int K, double alpha,
                                       const XorSignTags& tags = {});
OdeSystem xor_noiseless(int K, double alpha, XorSignTags tags = {});

// Rescaled dynamics at a point a of the quarter ring, coordinates
// (vt1, vt2, mt1, mt2, R11, R12, R22).
Schema bgmm_diffusive_schema();
SdeSystem bgmm_diffusive(std::array<double, 2> a, double alpha);

// K = 4 with units 1,2 on the mu ring and 3,4 on the nu ring; coordinates
// (vt1..vt4, mtmu1, mtmu2, mtnu3, mtnu4, R11..R44).
Schema xor_diffusive_schema();
SdeSystem xor_diffusive(std::array<double, 2> a_mu, std::array<double, 2> a_nu, double alpha);

}  // namespace sgdlab
