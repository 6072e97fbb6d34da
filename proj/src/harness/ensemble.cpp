#include "sgdlab/harness/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_at = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        // Report the lowest failing index so errors are reproducible.
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Fraction make_fraction(std::string label, int count, int total) {
  Fraction f{std::move(label), count, 0.0, 0.0};
  if (total > 0) {
    f.fraction = static_cast<double>(count) / total;
    f.se = std::sqrt(f.fraction * (1 - f.fraction) / total);
  }
  return f;
}

std::vector<Trajectory> EnsembleResult::trajectories() const {
  std::vector<Trajectory> out;
  for (const auto& r : runs)
    if (r.trajectory) out.push_back(*r.trajectory);
  return out;
}

EnsembleResult run_ensemble(const ExperimentConfig& cfg) {
  cfg.validate();
  const AnyModel model = build_model(cfg.model);
  const auto fps = fixed_points_for(cfg.model, cfg.c_delta);
  const double delta = cfg.delta();
  const std::int64_t stride = cfg.record_stride > 0 ? cfg.record_stride : std::max<std::int64_t>(cfg.steps, 1);

  EnsembleResult res{cfg, summary_schema(model), {}, {}, {}, {}, 0};
  res.runs.resize(static_cast<std::size_t>(cfg.runs));
  parallel_for(cfg.runs, cfg.threads, [&](int i) {
    RunRecord& rec = res.runs[static_cast<std::size_t>(i)];
    rec.index = i;
    rec.stream = static_cast<std::uint64_t>(i);
    RngStream rng(cfg.master_seed, rec.stream);
    ParamPoint x0 = initial_point(model, cfg, rng);
    try {
      Trajectory tr = sgd_run(model, std::move(x0), delta, cfg.steps, rng, stride);
      rec.endpoint = tr.back();
      rec.label = classify_endpoint(*rec.endpoint, fps, cfg.eps);
      if (cfg.model.family == ModelFamily::bgmm) rec.sign_rule = bgmm_sign_rule(*rec.endpoint);
      if (cfg.model.family == ModelFamily::xor_gmm) rec.sign_rule = xor_sign_rule(*rec.endpoint, cfg.model.K, cfg.eps);
      if (cfg.keep_trajectories) rec.trajectory = std::move(tr);
    } catch (const DivergenceError& e) {
      rec.label = "diverged";
      rec.diverged_step = e.step;
    }
  });

  std::map<std::string, int> counts;
  int unresolved = 0, stable = 0, signs = 0;
  for (const auto& r : res.runs) {
    signs += r.sign_rule.value_or(false);
    if (r.label == "diverged") {
      ++res.diverged;
    } else if (r.label == "unresolved") {
      ++unresolved;
    } else {
      ++counts[r.label];
      if (r.label.starts_with("stable:")) ++stable;
    }
  }
  const int total = cfg.runs - res.diverged;
  for (const auto& [label, c] : counts) res.fractions.push_back(make_fraction(label, c, total));
  res.fractions.push_back(make_fraction("unresolved", unresolved, total));
  res.stable = make_fraction("stable", stable, total);
  if (cfg.model.family != ModelFamily::tensor_pca) res.sign_rule = make_fraction("sign_rule", signs, total);
  return res;
}

}  // namespace sgdlab
