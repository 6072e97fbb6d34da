#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgdlab/core/rng.hpp"
#include "sgdlab/core/summary.hpp"
#include "sgdlab/core/trajectory.hpp"
#include "sgdlab/models/types.hpp"

namespace sgdlab {

// Two-layer ReLU network with sigmoid output on a binary Gaussian mixture,
// means +-mu. lambda may be +inf (noise-free data).
class BgmmModel {
 public:
  BgmmModel(int N, double lambda, double alpha, std::vector<double> mu);
  static BgmmModel with_axis_mean(int N, double lambda, double alpha);

  int N() const { return N_; }
  int K() const { return 2; }
  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& mu() const { return mu_; }
  const Schema& schema() const { return schema_; }

 private:
  int N_;
  double lambda_;
  double alpha_;
  std::vector<double> mu_;
  Schema schema_;
};

// XOR mixture: class 1 at +-mu, class 0 at +-nu, K hidden units.
class XorGmmModel {
 public:
  XorGmmModel(int N, int K, double lambda, double alpha, std::vector<double> mu,
              std::vector<double> nu);
  static XorGmmModel with_axis_means(int N, int K, double lambda, double alpha);

  int N() const { return N_; }
  int K() const { return K_; }
  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& nu() const { return nu_; }
  const Schema& schema() const { return schema_; }

 private:
  int N_;
  int K_;
  double lambda_;
  double alpha_;
  std::vector<double> mu_;
  std::vector<double> nu_;
  Schema schema_;
};

Schema bgmm_schema();
Schema xor_schema(int K);
// Name of R_ij (i <= j, 1-based) in the network schemas.
std::string gram_name(int i, int j, int K);

MixtureDatum sample_datum(const BgmmModel& model, RngStream& rng);
MixtureDatum sample_datum(const XorGmmModel& model, RngStream& rng);

std::vector<double> grad_loss(const BgmmModel& model, const ParamPoint& x, const MixtureDatum& d);
std::vector<double> grad_loss(const XorGmmModel& model, const ParamPoint& x, const MixtureDatum& d);
double loss(const BgmmModel& model, const ParamPoint& x, const MixtureDatum& d);
double loss(const XorGmmModel& model, const ParamPoint& x, const MixtureDatum& d);

SummaryVec summary(const BgmmModel& model, const ParamPoint& x);
SummaryVec summary(const XorGmmModel& model, const ParamPoint& x);

Trajectory sgd_run(const BgmmModel& model, ParamPoint x0, double delta, std::int64_t steps,
                   RngStream& rng, std::int64_t record_stride = 1);
Trajectory sgd_run(const XorGmmModel& model, ParamPoint x0, double delta, std::int64_t steps,
                   RngStream& rng, std::int64_t record_stride = 1);

// lambda = infinity population losses, evaluated from summary coordinates.
double population_loss(const BgmmModel& model, const SummaryVec& u);
double population_loss(const XorGmmModel& model, const SummaryVec& u);
double bgmm_noiseless_loss(std::span<const double> u, double alpha);
double xor_noiseless_loss(std::span<const double> u, int K, double alpha);

ParamPoint random_init(const BgmmModel& model, RngStream& rng);
ParamPoint random_init(const XorGmmModel& model, RngStream& rng);
// Lifts a summary target to parameters; W_perp directions are isotropic in the
// complement of the means with Gram matrix equal to the target R.
ParamPoint warm_start(const BgmmModel& model, const SummaryVec& target, RngStream& rng);
ParamPoint warm_start(const XorGmmModel& model, const SummaryVec& target, RngStream& rng);

double sigmoid(double x);
double softplus(double x);

}  // namespace sgdlab
