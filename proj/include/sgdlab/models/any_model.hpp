#pragma once

#include <variant>

#include "sgdlab/models/tensor_pca.hpp"
#include "sgdlab/models/two_layer.hpp"

namespace sgdlab {

using AnyModel = std::variant<TensorPcaModel, BgmmModel, XorGmmModel>;

ModelFamily family(const AnyModel& m);
const Schema& summary_schema(const AnyModel& m);
// n for tensor PCA, N for the networks; the step size is c_delta over this.
int ambient_dim(const AnyModel& m);

Datum sample_datum(const AnyModel& m, RngStream& rng);
std::vector<double> grad_loss(const AnyModel& m, const ParamPoint& x, const Datum& d);
SummaryVec summary(const AnyModel& m, const ParamPoint& x);
Trajectory sgd_run(const AnyModel& m, ParamPoint x0, double delta, std::int64_t steps,
                   RngStream& rng, std::int64_t record_stride = 1);
double population_loss(const AnyModel& m, const SummaryVec& u);
ParamPoint random_init(const AnyModel& m, RngStream& rng);
ParamPoint warm_start(const AnyModel& m, const SummaryVec& target, RngStream& rng);

}  // namespace sgdlab
