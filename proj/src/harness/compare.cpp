#include "sgdlab/harness/compare.hpp"

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

CompareReport compare_to_limit(std::span<const Trajectory> runs, const OdeSystem& sys,
                               MatchMode mode, double t0, double t1, double h) {
  if (runs.empty()) throw RangeError("compare_to_limit needs at least one trajectory");
  if (!(t1 > t0) || t0 < 0) throw RangeError("compare window must satisfy 0 <= t0 < t1");
  for (const auto& r : runs) require_same_schema(r.schema(), sys.schema, "compare_to_limit");
  CompareReport rep{mode, t0, t1, {}, 0.0, Trajectory(sys.schema), mean_trajectory(runs)};
  rep.limit = rk4_integrate(sys, rep.mean.point(0), t1, h);
  rep.mean_sup = sup_distance(rep.mean, rep.limit, t0, t1);
  if (mode == MatchMode::per_run) {
    for (const auto& r : runs) {
      const Trajectory lim = rk4_integrate(sys, r.point(0), t1, h);
      rep.per_run_sup.push_back(sup_distance(r, lim, t0, t1));
    }
  }
  return rep;
}

CompareReport compare_to_limit(const Trajectory& run, const OdeSystem& sys, double t0, double t1,
                               double h) {
  return compare_to_limit(std::span<const Trajectory>(&run, 1), sys, MatchMode::per_run, t0, t1, h);
}

}  // namespace sgdlab
