#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgdlab/harness/config.hpp"

namespace sgdlab {

struct RunRecord {
  int index = 0;
  std::uint64_t stream = 0;  // RngStream(master_seed, stream)
  std::optional<SummaryVec> endpoint;
  std::string label;  // fixed-point label, "unresolved" or "diverged"
  std::optional<std::int64_t> diverged_step;
  std::optional<bool> sign_rule;  // networks only
  std::optional<Trajectory> trajectory;
};

struct Fraction {
  std::string label;
  int count = 0;
  double fraction = 0;
  double se = 0;  // binomial
};

// Fractions are over non-diverged runs.
struct EnsembleResult {
  ExperimentConfig config;
  Schema schema;
  std::vector<RunRecord> runs;
  std::vector<Fraction> fractions;  // per label, unresolved last
  Fraction stable;                  // all labels starting with "stable:"
  std::optional<Fraction> sign_rule;  // networks: bgmm_sign_rule / xor_sign_rule
  int diverged = 0;

  std::vector<Trajectory> trajectories() const;
};

Fraction make_fraction(std::string label, int count, int total);

// Runs are independent and reduced in index order, so the result does not
// depend on the thread count.
EnsembleResult run_ensemble(const ExperimentConfig& cfg);

// Work pool used by the ensemble; fn(i) for i in [0, n).
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace sgdlab
