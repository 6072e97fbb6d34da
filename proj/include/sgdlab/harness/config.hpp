#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgdlab/fixedpoints/fixed_points.hpp"
#include "sgdlab/limits/systems.hpp"
#include "sgdlab/models/any_model.hpp"

namespace sgdlab {

struct ModelSpec {
  ModelFamily family = ModelFamily::tensor_pca;
  int n = 1000;  // n for tensor PCA, N for the networks
  int k = 2;     // tensor order
  int K = 4;     // XOR width; the binary mixture always has 2 units
  double lambda = 1.0;
  double alpha = 0.0;
};

// Named summary coordinates; the rest default to 0 (r2 defaults to 1 for PCA).
using NamedValues = std::vector<std::pair<std::string, double>>;

struct InitSpec {
  enum class Kind { random, warm };
  Kind kind = Kind::random;
  NamedValues target;
};

enum class MatchMode { per_run, mean };

struct LimitSpec {
  std::string system;  // empty: the ballistic system of the model
  double t_end = 0;    // 0: steps * delta
  double h = kDefaultOdeStep;
  std::int64_t record_stride = 10;
  int paths = 1;
  int mc_samples = 100000;
  std::optional<double> Lambda;
  std::vector<double> a;     // binary-mixture ring point
  std::vector<double> a_mu;  // XOR rings
  std::vector<double> a_nu;
  MatchMode mode = MatchMode::mean;
};

struct Ar1Spec {
  std::string coordinate = "m";
  bool sqrt_n_scale = true;
  std::int64_t window = 0;  // steps; 0 uses all recorded steps
};

struct DriftSpec {
  int samples = 100000;
  std::vector<std::string> sqrt_n_scaled;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelSpec model;
  double c_delta = 1.0;
  std::int64_t steps = 1000;
  int runs = 1;
  std::uint64_t master_seed = 0;
  InitSpec init;
  std::int64_t record_stride = 0;  // 0: endpoints only
  double eps = kDefaultClassifyEps;
  bool keep_trajectories = false;
  int threads = 0;  // 0: hardware concurrency; never affects results
  LimitSpec limit;
  Ar1Spec ar1;
  DriftSpec drift;

  double delta() const { return c_delta / model.n; }
  void validate() const;  // throws ConfigError
};

ModelFamily parse_family(std::string_view s);
AnyModel build_model(const ModelSpec& spec);
SummaryVec target_summary(const Schema& schema, const NamedValues& target, ModelFamily family);
ParamPoint initial_point(const AnyModel& model, const ExperimentConfig& cfg, RngStream& rng);

// lambda = infinity forms for the networks.
std::vector<FixedPointRecord> fixed_points_for(const ModelSpec& spec, double c_delta);

OdeSystem limit_ode_for(const ExperimentConfig& cfg);
SdeSystem limit_sde_for(const ExperimentConfig& cfg);

// Config echo for provenance. Leaves out threads, which never change results.
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace sgdlab
