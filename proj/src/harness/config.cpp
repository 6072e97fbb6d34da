#include "sgdlab/harness/config.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/limits/gmm_limits.hpp"
#include "sgdlab/limits/tensor_pca_limits.hpp"

namespace sgdlab {

void ExperimentConfig::validate() const {
  auto fail = [](std::string_view key, std::string_view why) {
    throw ConfigError(fmt::format("invalid value for '{}': {}", key, why));
  };
  if (model.n < 1) fail("model.n", "must be >= 1");
  if (model.family == ModelFamily::tensor_pca && model.k < 2) fail("model.k", "must be >= 2");
  if (model.family == ModelFamily::xor_gmm && model.K < 1) fail("model.K", "must be >= 1");
  if (!(model.lambda > 0)) fail("model.lambda", "must be positive");
  if (!(model.alpha >= 0) || !std::isfinite(model.alpha)) fail("model.alpha", "must be finite and >= 0");
  if (!(c_delta > 0) || !std::isfinite(c_delta)) fail("c_delta", "must be finite and positive");
  if (steps < 0) fail("steps", "must be >= 0");
  if (runs < 1) fail("runs", "must be >= 1");
  if (record_stride < 0) fail("record_stride", "must be >= 0");
  if (!(eps > 0)) fail("eps", "must be positive");
  if (threads < 0) fail("threads", "must be >= 0");
  if (!(limit.h > 0)) fail("limit.h", "must be positive");
  if (limit.t_end < 0) fail("limit.t_end", "must be >= 0");
  if (limit.paths < 1) fail("limit.paths", "must be >= 1");
  if (limit.record_stride < 1) fail("limit.record_stride", "must be >= 1");
  if (limit.mc_samples < 2) fail("limit.mc_samples", "must be >= 2");
  if (drift.samples < 100) fail("drift.samples", "must be >= 100");
  if (ar1.window < 0) fail("ar1.window", "must be >= 0");
}

ModelFamily parse_family(std::string_view s) {
  if (s == "tensor" || s == "tensor_pca" || s == "pca") return ModelFamily::tensor_pca;
  if (s == "bgmm") return ModelFamily::bgmm;
  if (s == "xor" || s == "xor_gmm") return ModelFamily::xor_gmm;
  throw ConfigError(fmt::format("unknown model family '{}' (expected tensor, bgmm or xor)", s));
}

AnyModel build_model(const ModelSpec& s) {
  switch (s.family) {
    case ModelFamily::tensor_pca: return TensorPcaModel::with_axis_spike(s.n, s.k, s.lambda, s.alpha);
    case ModelFamily::bgmm: return BgmmModel::with_axis_mean(s.n, s.lambda, s.alpha);
    case ModelFamily::xor_gmm: return XorGmmModel::with_axis_means(s.n, s.K, s.lambda, s.alpha);
  }
  throw ConfigError("unknown model family");
}

SummaryVec target_summary(const Schema& schema, const NamedValues& target, ModelFamily family) {
  std::vector<double> u(schema.size(), 0.0);
  if (auto r2 = schema.find("r2"); r2 && family == ModelFamily::tensor_pca) u[*r2] = 1.0;
  for (const auto& [name, value] : target) {
    const auto at = schema.find(name);
    if (!at) throw ConfigError(fmt::format("unknown summary coordinate '{}' in init.target", name));
    u[*at] = value;
  }
  return SummaryVec(schema, std::move(u));
}

ParamPoint initial_point(const AnyModel& model, const ExperimentConfig& cfg, RngStream& rng) {
  if (cfg.init.kind == InitSpec::Kind::random) return random_init(model, rng);
  return warm_start(model, target_summary(summary_schema(model), cfg.init.target, cfg.model.family), rng);
}

std::vector<FixedPointRecord> fixed_points_for(const ModelSpec& s, double c_delta) {
  switch (s.family) {
    case ModelFamily::tensor_pca: return tensor_pca_fixed_points(s.k, s.lambda, c_delta);
    case ModelFamily::bgmm: return bgmm_fixed_points(s.alpha);
    case ModelFamily::xor_gmm: return xor_fixed_points(s.alpha, s.K);
  }
  return {};
}

namespace {

std::string default_system(ModelFamily f, double lambda) {
  const bool noiseless = std::isinf(lambda);
  switch (f) {
    case ModelFamily::tensor_pca: return "tensor-ballistic";
    case ModelFamily::bgmm: return noiseless ? "bgmm-noiseless" : "bgmm-ballistic";
    case ModelFamily::xor_gmm: return noiseless ? "xor-noiseless" : "xor-ballistic";
  }
  return {};
}

template <std::size_t N>
std::array<double, N> fixed(const std::vector<double>& v, std::string_view key) {
  if (v.size() != N) throw ConfigError(fmt::format("'{}' needs {} entries, got {}", key, N, v.size()));
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

McConfig mc_for(const ExperimentConfig& cfg) {
  // Disjoint from the per-run streams (master_seed, i).
  return McConfig{cfg.limit.mc_samples, RngStream(cfg.master_seed, 0).substream(0x6d63)};
}

}  // namespace

OdeSystem limit_ode_for(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  const std::string sys = cfg.limit.system.empty() ? default_system(m.family, m.lambda) : cfg.limit.system;
  if (sys == "tensor-ballistic") return tensor_pca_ballistic({m.k, m.lambda, cfg.c_delta, m.alpha});
  if (sys == "tensor-loss") return tensor_pca_loss(m.k, m.lambda, cfg.c_delta);
  if (sys == "bgmm-ballistic") return bgmm_ballistic(m.lambda, m.alpha, cfg.c_delta, mc_for(cfg));
  if (sys == "bgmm-noiseless") return bgmm_noiseless(m.alpha);
  if (sys == "xor-ballistic") return xor_ballistic(m.K, m.lambda, m.alpha, cfg.c_delta, mc_for(cfg));
  if (sys == "xor-noiseless") return xor_noiseless(m.K, m.alpha);
  throw ConfigError(fmt::format("'{}' is not an ODE system", sys));
}

SdeSystem limit_sde_for(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  const std::string& sys = cfg.limit.system;
  if (sys == "tensor-diffusive") return tensor_pca_diffusive(m.k, m.lambda, cfg.limit.Lambda);
  if (sys == "tensor-double-diffusive") return tensor_pca_double_diffusive(m.k, m.lambda);
  if (sys == "bgmm-diffusive") return bgmm_diffusive(fixed<2>(cfg.limit.a, "limit.a"), m.alpha);
  if (sys == "xor-diffusive")
    return xor_diffusive(fixed<2>(cfg.limit.a_mu, "limit.a_mu"), fixed<2>(cfg.limit.a_nu, "limit.a_nu"), m.alpha);
  throw ConfigError(fmt::format("'{}' is not an SDE system", sys.empty() ? "<empty>" : sys));
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  using nlohmann::json;
  auto num = [](double x) -> json {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
  };
  json target = json::object();
  for (const auto& [k, v] : cfg.init.target) target[k] = v;
  json limit = {{"system", cfg.limit.system},       {"t_end", cfg.limit.t_end},
                {"h", cfg.limit.h},                 {"record_stride", cfg.limit.record_stride},
                {"paths", cfg.limit.paths},         {"mc_samples", cfg.limit.mc_samples},
                {"a", cfg.limit.a},                 {"a_mu", cfg.limit.a_mu},
                {"a_nu", cfg.limit.a_nu},
                {"mode", cfg.limit.mode == MatchMode::mean ? "mean" : "per_run"}};
  if (cfg.limit.Lambda) limit["Lambda"] = *cfg.limit.Lambda;
  return {
      {"name", cfg.name},
      {"model",
       {{"family", family_name(cfg.model.family)},
        {"n", cfg.model.n},
        {"k", cfg.model.k},
        {"K", cfg.model.K},
        {"lambda", num(cfg.model.lambda)},
        {"alpha", cfg.model.alpha}}},
      {"c_delta", cfg.c_delta},
      {"delta", cfg.delta()},
      {"steps", cfg.steps},
      {"runs", cfg.runs},
      {"master_seed", cfg.master_seed},
      {"init", {{"kind", cfg.init.kind == InitSpec::Kind::random ? "random" : "warm"}, {"target", target}}},
      {"record_stride", cfg.record_stride},
      {"eps", cfg.eps},
      {"keep_trajectories", cfg.keep_trajectories},
      {"limit", limit},
      {"ar1", {{"coordinate", cfg.ar1.coordinate}, {"sqrt_n_scale", cfg.ar1.sqrt_n_scale}, {"window", cfg.ar1.window}}},
      {"drift", {{"samples", cfg.drift.samples}, {"sqrt_n_scaled", cfg.drift.sqrt_n_scaled}}},
  };
}

}  // namespace sgdlab
