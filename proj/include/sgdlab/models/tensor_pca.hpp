#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgdlab/core/rng.hpp"
#include "sgdlab/core/summary.hpp"
#include "sgdlab/core/trajectory.hpp"
#include "sgdlab/models/types.hpp"

namespace sgdlab {

class TensorPcaModel {
 public:
  TensorPcaModel(int n, int k, double lambda, double alpha, std::vector<double> spike);
  static TensorPcaModel with_axis_spike(int n, int k, double lambda, double alpha);

  int n() const { return n_; }
  int k() const { return k_; }
  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& spike() const { return spike_; }
  const Schema& schema() const { return schema_; }  // (m, r2)

 private:
  int n_;
  int k_;
  double lambda_;
  double alpha_;
  std::vector<double> spike_;
  Schema schema_;
};

Schema tensor_pca_schema();

PcaDatum sample_datum(const TensorPcaModel& model, RngStream& rng);
DenseTensor sample_dense_noise(const TensorPcaModel& model, RngStream& rng);

// Contraction of the noise tensor with x in every slot but one, summed over the
// free slot. This is the gradient of <W, x^{(x)k}>.
std::vector<double> noise_contraction(const DenseTensor& w, std::span<const double> x);

// Lazy contraction at x for a given lazy draw.
std::vector<double> noise_contraction(const TensorPcaModel& model, const LazyTensorNoise& noise,
                                      std::span<const double> x);

// An explicit i.i.d. tensor whose contraction at x equals the lazy draw's.
// Conditions a fresh i.i.d. tensor from `rng` on the contraction value.
DenseTensor materialize_noise(const TensorPcaModel& model, std::span<const double> x,
                              const LazyTensorNoise& noise, RngStream& rng);

std::vector<double> grad_loss(const TensorPcaModel& model, const ParamPoint& x, const PcaDatum& d);
// Needs a dense tensor; the constant c(Y) is dropped.
double loss(const TensorPcaModel& model, const ParamPoint& x, const PcaDatum& d);

SummaryVec summary(const TensorPcaModel& model, const ParamPoint& x);

Trajectory sgd_run(const TensorPcaModel& model, ParamPoint x0, double delta, std::int64_t steps,
                   RngStream& rng, std::int64_t record_stride = 1);

// V = c_xx * x x^T + c_id * I.
struct TensorPcaV {
  double c_xx;
  double c_id;
};
TensorPcaV tensor_pca_V(const TensorPcaModel& model, const ParamPoint& x);

double population_loss(const TensorPcaModel& model, const SummaryVec& u);

ParamPoint random_init(const TensorPcaModel& model, RngStream& rng);
ParamPoint warm_start(const TensorPcaModel& model, double m, double r2, RngStream& rng);

}  // namespace sgdlab
