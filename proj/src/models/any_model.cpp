#include "sgdlab/models/any_model.hpp"

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

std::string_view family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::tensor_pca: return "tensor";
    case ModelFamily::bgmm: return "bgmm";
    case ModelFamily::xor_gmm: return "xor";
  }
  return "?";
}

ModelFamily family(const AnyModel& m) {
  return std::visit(
      [](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TensorPcaModel>) return ModelFamily::tensor_pca;
        else if constexpr (std::is_same_v<T, BgmmModel>) return ModelFamily::bgmm;
        else return ModelFamily::xor_gmm;
      },
      m);
}

const Schema& summary_schema(const AnyModel& m) {
  return std::visit([](const auto& x) -> const Schema& { return x.schema(); }, m);
}

int ambient_dim(const AnyModel& m) {
  if (auto* p = std::get_if<TensorPcaModel>(&m)) return p->n();
  if (auto* b = std::get_if<BgmmModel>(&m)) return b->N();
  return std::get<XorGmmModel>(m).N();
}

Datum sample_datum(const AnyModel& m, RngStream& rng) {
  return std::visit([&](const auto& x) -> Datum { return sample_datum(x, rng); }, m);
}

std::vector<double> grad_loss(const AnyModel& m, const ParamPoint& x, const Datum& d) {
  return std::visit(
      [&](const auto& model) -> std::vector<double> {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, TensorPcaModel>) {
          const auto* pd = std::get_if<PcaDatum>(&d);
          if (!pd) throw SchemaError("tensor PCA gradient needs a tensor datum");
          return grad_loss(model, x, *pd);
        } else {
          const auto* md = std::get_if<MixtureDatum>(&d);
          if (!md) throw SchemaError("network gradient needs a mixture datum");
          return grad_loss(model, x, *md);
        }
      },
      m);
}

SummaryVec summary(const AnyModel& m, const ParamPoint& x) {
  return std::visit([&](const auto& model) { return summary(model, x); }, m);
}

Trajectory sgd_run(const AnyModel& m, ParamPoint x0, double delta, std::int64_t steps,
                   RngStream& rng, std::int64_t record_stride) {
  return std::visit(
      [&](const auto& model) { return sgd_run(model, std::move(x0), delta, steps, rng, record_stride); },
      m);
}

double population_loss(const AnyModel& m, const SummaryVec& u) {
  return std::visit([&](const auto& model) { return population_loss(model, u); }, m);
}

ParamPoint random_init(const AnyModel& m, RngStream& rng) {
  return std::visit([&](const auto& model) { return random_init(model, rng); }, m);
}

ParamPoint warm_start(const AnyModel& m, const SummaryVec& target, RngStream& rng) {
  return std::visit(
      [&](const auto& model) -> ParamPoint {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, TensorPcaModel>) {
          require_same_schema(target.schema(), model.schema(), "warm_start");
          return warm_start(model, target[0], target[1], rng);
        } else {
          return warm_start(model, target, rng);
        }
      },
      m);
}

}  // namespace sgdlab
