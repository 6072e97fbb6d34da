#pragma once

#include <span>
#include <vector>

#include "sgdlab/harness/config.hpp"

namespace sgdlab {

struct CompareReport {
  MatchMode mode = MatchMode::mean;
  double t0 = 0, t1 = 0;
  std::vector<double> per_run_sup;  // per_run mode only
  double mean_sup = 0;              // ensemble mean vs limit from the mean start
  Trajectory limit;
  Trajectory mean;
};

// Runs must share one recording grid.
CompareReport compare_to_limit(std::span<const Trajectory> runs, const OdeSystem& sys,
                               MatchMode mode, double t0, double t1, double h = kDefaultOdeStep);
CompareReport compare_to_limit(const Trajectory& run, const OdeSystem& sys, double t0, double t1,
                               double h = kDefaultOdeStep);

}  // namespace sgdlab
