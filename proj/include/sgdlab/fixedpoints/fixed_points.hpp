#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sgdlab/core/rng.hpp"
#include "sgdlab/core/summary.hpp"
#include "sgdlab/limits/gmm_limits.hpp"

namespace sgdlab {

enum class Stability { stable, unstable };
std::string_view stability_name(Stability s);

// offset + sum_i a_i d_i, where every unit i belongs to a block b, the a_i of a
// block are >= 0 with squared norm C, and d_i has one or two +-1 entries on
// disjoint coordinates. No units means a single point.
struct RingPiece {
  struct Unit {
    int block;
    std::vector<std::pair<int, double>> dir;
  };
  std::vector<double> offset;
  std::vector<Unit> units;
  int blocks = 0;
  double C = 0;

  double distance(std::span<const double> u) const;
  // Evenly weighted point: a_i = sqrt(C / |block|).
  std::vector<double> center() const;
  std::vector<double> sample(RngStream& rng) const;
};

struct FixedPointRecord {
  std::string label;
  Stability stability;
  Schema schema;
  std::vector<RingPiece> pieces;  // union
  std::string kind;               // point | ring | partition
  double radius2 = 0;             // ring constant, 0 for points
  double residual = 0;            // max |rhs| over checked representatives

  double distance(const SummaryVec& u) const;
  SummaryVec representative() const;
};

// Tensor PCA.
double tensor_pca_lambda_c(int k, double c_delta);
double tensor_pca_psi(double rho, int k, double lambda, double c_delta);
std::vector<FixedPointRecord> tensor_pca_fixed_points(int k, double lambda, double c_delta);

// Binary mixture, lambda = infinity.
std::vector<FixedPointRecord> bgmm_fixed_points(double alpha);

// XOR, lambda = infinity. Blocks in order I_mu+, I_mu-, I_nu+, I_nu-; -1 is I_0.
struct XorPartition {
  std::vector<int> block_of;  // per unit
  unsigned nonempty_mask() const;
};
struct XorConnectivity {
  int components = 0;
  int stable_components = 0;
  std::vector<int> component_of;      // per enumerated partition
  std::vector<XorPartition> partitions;
};
XorConnectivity xor_connectivity(int K);
std::vector<FixedPointRecord> xor_fixed_points(double alpha, int K,
                                               XorConnectivity* report = nullptr);
RingPiece xor_piece(const XorPartition& p, int K, double C);

// Exact success probability and its enumeration cross-check.
struct ExactProbability {
  boost::multiprecision::cpp_rational value;
  double approx;
  std::string str() const;  // "p/q"
};
ExactProbability xor_success_probability(int K);
ExactProbability xor_success_probability_enumerated(int K);

inline constexpr double kDefaultClassifyEps = 0.05;
std::string classify_endpoint(const SummaryVec& u, const std::vector<FixedPointRecord>& fps,
                              double eps = kDefaultClassifyEps);

// Success read off endpoint signs, the statistic behind the basin figures.
// Binary mixture: m1 m2 < 0. XOR: every block I_mu+-, I_nu+- holds a unit with
// |v|, |m| > tol and the block's signs.
bool bgmm_sign_rule(const SummaryVec& u);
bool xor_sign_rule(const SummaryVec& u, int K, double tol = kDefaultClassifyEps);

// Residual of each record under its matching exact field.
double max_residual(const FixedPointRecord& rec, const OdeSystem& sys, RngStream& rng,
                    int samples_per_piece = 4);

}  // namespace sgdlab
