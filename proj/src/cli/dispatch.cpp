#include "sgdlab/cli/dispatch.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sgdlab/cli/config_io.hpp"
#include "sgdlab/core/errors.hpp"
#include "sgdlab/harness/ar1.hpp"
#include "sgdlab/harness/compare.hpp"
#include "sgdlab/harness/ensemble.hpp"
#include "sgdlab/harness/export.hpp"
#include "sgdlab/harness/one_step.hpp"
#include "sgdlab/limits/gmm_limits.hpp"

namespace sgdlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config, preset, out;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int threads = 0;
  CLI::App* active = nullptr;  // the parsed subcommand
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config,-c", c.config, "experiment file (TOML, or JSON by extension)");
  sub->add_option("--preset,-p", c.preset, "bundled figure preset (fig1..fig9)");
  sub->add_option("--set,-s", c.sets, "override, key=value (repeatable)");
  sub->add_option("--out,-o", c.out, "output directory (default $SGDLAB_OUT_DIR or .)");
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

json base_tree(const Common& c) {
  if (!c.config.empty() && !c.preset.empty()) throw ConfigError("use either --config or --preset, not both");
  json tree = json::object();
  if (!c.config.empty()) tree = load_config_file(c.config);
  else if (!c.preset.empty()) tree = preset_tree(c.preset);
  for (const auto& s : c.sets) apply_override(tree, s);
  if (c.active->get_option("--seed")->count()) tree["seed"] = c.seed;
  if (c.active->get_option("--threads")->count()) tree["threads"] = c.threads;
  return tree;
}

fs::path out_dir(const Common& c) {
  fs::path dir = ".";
  if (!c.out.empty()) dir = c.out;
  else if (const char* env = std::getenv("SGDLAB_OUT_DIR"); env && *env) dir = env;
  std::error_code ec;
  fs::create_directories(dir, ec);
  return dir;
}

double horizon(const ExperimentConfig& cfg) {
  return cfg.limit.t_end > 0 ? cfg.limit.t_end : static_cast<double>(cfg.steps) * cfg.delta();
}

SummaryVec start_point(const Schema& schema, const ExperimentConfig& cfg) {
  SummaryVec u = target_summary(schema, cfg.init.target, cfg.model.family);
  // The loss coordinate starts at the population loss unless given.
  if (auto phi = schema.find("Phi")) {
    bool given = false;
    for (const auto& [k, v] : cfg.init.target) given |= k == "Phi";
    if (!given) {
      const auto model = TensorPcaModel::with_axis_spike(1, cfg.model.k, cfg.model.lambda, 0.0);
      std::vector<double> vals = u.values();
      vals[*phi] = population_loss(model, SummaryVec(tensor_pca_schema(), {u.at("m"), u.at("r2")}));
      u = SummaryVec(schema, std::move(vals));
    }
  }
  return u;
}

void print_fractions(std::ostream& out, const EnsembleResult& r) {
  fmt::print(out, "# {}: {} runs, {} diverged\n", r.config.name, r.runs.size(), r.diverged);
  fmt::print(out, "label\tcount\tfraction\tse\n");
  for (const auto& f : r.fractions) fmt::print(out, "{}\t{}\t{:.6f}\t{:.6f}\n", f.label, f.count, f.fraction, f.se);
  fmt::print(out, "stable\t{}\t{:.6f}\t{:.6f}\n", r.stable.count, r.stable.fraction, r.stable.se);
  if (r.sign_rule)
    fmt::print(out, "sign_rule\t{}\t{:.6f}\t{:.6f}\n", r.sign_rule->count, r.sign_rule->fraction, r.sign_rule->se);
}

int cmd_simulate(const Common& c, std::ostream& out, std::ostream& err, bool basin) {
  for (auto cfg : configs_from_tree(base_tree(c))) {
    if (basin) {
      cfg.record_stride = 0;
      cfg.keep_trajectories = false;
    }
    fmt::print(err, "{}: {} runs of {} steps\n", cfg.name, cfg.runs, cfg.steps);
    const auto res = run_ensemble(cfg);
    const auto paths = export_ensemble(res, out_dir(c));
    print_fractions(out, res);
    for (const auto& p : paths) fmt::print(err, "wrote {}\n", p.string());
  }
  return kExitOk;
}

int cmd_limit_ode(const Common& c, std::ostream& out, std::ostream& err) {
  for (const auto& cfg : configs_from_tree(base_tree(c))) {
    const OdeSystem sys = limit_ode_for(cfg);
    const SummaryVec u0 = start_point(sys.schema, cfg);
    const double T = horizon(cfg);
    fmt::print(err, "{}: integrating to t = {}\n", cfg.name, T);
    const Trajectory tr = rk4_integrate(sys, u0, T, cfg.limit.h, cfg.limit.record_stride);
    const fs::path p = out_dir(c) / (cfg.name + ".limit.csv");
    write_csv(p, tr);
    fmt::print(out, "# {} t = {}\n", cfg.name, tr.t_end());
    const auto end = tr.back();
    for (std::size_t j = 0; j < end.size(); ++j) fmt::print(out, "{}\t{:.17g}\n", sys.schema[j], end[j]);
    fmt::print(err, "wrote {}\n", p.string());
  }
  return kExitOk;
}

int cmd_limit_sde(const Common& c, std::ostream& out, std::ostream& err) {
  for (const auto& cfg : configs_from_tree(base_tree(c))) {
    const SdeSystem sys = limit_sde_for(cfg);
    const SummaryVec u0 = target_summary(sys.schema, cfg.init.target, cfg.model.family);
    const double T = horizon(cfg);
    fmt::print(err, "{}: {} paths to t = {}\n", cfg.name, cfg.limit.paths, T);
    std::vector<std::optional<Trajectory>> paths(static_cast<std::size_t>(cfg.limit.paths));
    parallel_for(cfg.limit.paths, cfg.threads, [&](int i) {
      RngStream rng(cfg.master_seed, static_cast<std::uint64_t>(i));
      paths[i] = euler_maruyama(sys, u0, T, rng, cfg.limit.h, cfg.limit.record_stride);
    });
    const fs::path p = out_dir(c) / (cfg.name + ".sde.csv");
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError(fmt::format("cannot open '{}' for writing", p.string()));
    os << "path,t";
    for (const auto& n : sys.schema.names()) os << ',' << n;
    os << '\n';
    // Moments over the second half of every path.
    const std::size_t d = sys.schema.size();
    std::vector<double> s1(d, 0.0), s2(d, 0.0);
    double count = 0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const Trajectory& tr = *paths[i];
      for (std::size_t r = 0; r < tr.size(); ++r) {
        fmt::print(os, "{},{:.17g}", i, tr.times()[r]);
        for (double x : tr.row(r)) fmt::print(os, ",{:.17g}", x);
        os << '\n';
        if (tr.times()[r] >= T / 2) {
          for (std::size_t j = 0; j < d; ++j) {
            s1[j] += tr.row(r)[j];
            s2[j] += tr.row(r)[j] * tr.row(r)[j];
          }
          count += 1;
        }
      }
    }
    if (!os.flush()) throw IoError(fmt::format("write to '{}' failed", p.string()));
    fmt::print(out, "# {}: second-half moments over {} paths\ncoordinate\tmean\tvariance\n", cfg.name, paths.size());
    for (std::size_t j = 0; j < d; ++j) {
      const double m = s1[j] / count;
      fmt::print(out, "{}\t{:.6g}\t{:.6g}\n", sys.schema[j], m, s2[j] / count - m * m);
    }
    fmt::print(err, "wrote {}\n", p.string());
  }
  return kExitOk;
}

int cmd_fixed_points(const Common& c, std::ostream& out) {
  for (const auto& cfg : configs_from_tree(base_tree(c))) {
    std::vector<FixedPointRecord> fps;
    XorConnectivity conn;
    if (cfg.model.family == ModelFamily::xor_gmm) fps = xor_fixed_points(cfg.model.alpha, cfg.model.K, &conn);
    else fps = fixed_points_for(cfg.model, cfg.c_delta);
    fmt::print(out, "# {} fixed points ({} records)\n", family_name(cfg.model.family), fps.size());
    if (cfg.model.family == ModelFamily::xor_gmm)
      fmt::print(out, "# components {} stable {}\n", conn.components, conn.stable_components);
    fmt::print(out, "label\tstability\tkind\tcoordinates\tradius2\tresidual\n");
    for (const auto& fp : fps) {
      const auto rep = fp.representative();
      std::vector<std::string> coords;
      for (std::size_t j = 0; j < rep.size(); ++j) coords.push_back(fmt::format("{}={:.6g}", fp.schema[j], rep[j]));
      fmt::print(out, "{}\t{}\t{}\t{}\t{:.6g}\t{:.3g}\n", fp.label, stability_name(fp.stability), fp.kind,
                 fmt::join(coords, ","), fp.radius2, fp.residual);
    }
  }
  return kExitOk;
}

int cmd_drift_check(const Common& c, std::ostream& out, std::ostream& err) {
  for (const auto& cfg : configs_from_tree(base_tree(c))) {
    const AnyModel model = build_model(cfg.model);
    const Schema& schema = summary_schema(model);
    RngStream rng(cfg.master_seed, 0);
    const ParamPoint x = initial_point(model, cfg, rng);
    std::vector<double> scale(schema.size(), 1.0);
    const double sn = std::sqrt(static_cast<double>(cfg.model.n));
    for (const auto& name : cfg.drift.sqrt_n_scaled) {
      const auto at = schema.find(name);
      if (!at) throw ConfigError(fmt::format("unknown coordinate '{}' in drift.sqrt_n_scaled", name));
      scale[*at] = sn;
    }
    fmt::print(err, "{}: {} one-step samples\n", cfg.name, cfg.drift.samples);
    RngStream data = rng.substream(1);
    const auto est = estimate_one_step(model, x, cfg.delta(), cfg.drift.samples, data, scale);
    const SummaryVec h = evaluate(limit_ode_for(cfg), est.point);
    json rows = json::array();
    fmt::print(out, "coordinate\tdrift\tse\tlimit\tz\tcov_over_delta\n");
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const double theory = scale[j] * h[j];
      const double z = est.mean_se[j] > 0 ? (est.mean[j] - theory) / est.mean_se[j] : 0.0;
      const auto jj = static_cast<Eigen::Index>(j);
      fmt::print(out, "{}\t{:.6g}\t{:.3g}\t{:.6g}\t{:.2f}\t{:.6g}\n", schema[j], est.mean[j], est.mean_se[j], theory, z,
                 est.cov(jj, jj));
      rows.push_back({{"coordinate", schema[j]},
                      {"drift", est.mean[j]},
                      {"se", est.mean_se[j]},
                      {"limit", theory},
                      {"cov_over_delta", est.cov(jj, jj)},
                      {"cov_se", est.cov_se(jj, jj)}});
    }
    const fs::path p = out_dir(c) / (cfg.name + ".drift.json");
    write_json(p, {{"config", to_json(cfg)}, {"samples", est.samples}, {"coordinates", rows}});
    fmt::print(err, "wrote {}\n", p.string());
  }
  return kExitOk;
}

int cmd_compare(const Common& c, std::ostream& out, std::ostream& err) {
  for (auto cfg : configs_from_tree(base_tree(c))) {
    const bool keep = cfg.keep_trajectories;
    cfg.keep_trajectories = true;
    if (cfg.record_stride == 0) cfg.record_stride = std::max<std::int64_t>(1, cfg.steps / 1000);
    fmt::print(err, "{}: {} runs of {} steps\n", cfg.name, cfg.runs, cfg.steps);
    auto res = run_ensemble(cfg);
    if (res.diverged > 0) throw DomainError(fmt::format("{} of {} runs diverged", res.diverged, res.runs.size()));
    const auto trajs = res.trajectories();
    const double T = std::min(horizon(cfg), trajs.front().t_end());
    const auto rep = compare_to_limit(trajs, limit_ode_for(cfg), cfg.limit.mode, 0.0, T, cfg.limit.h);
    if (!keep)
      for (auto& r : res.runs) r.trajectory.reset();
    export_ensemble(res, out_dir(c));
    const auto p = export_compare(rep, out_dir(c), cfg.name);
    fmt::print(out, "# {}\nmean_sup\t{:.6g}\n", cfg.name, rep.mean_sup);
    for (std::size_t i = 0; i < rep.per_run_sup.size(); ++i) fmt::print(out, "run{}_sup\t{:.6g}\n", i, rep.per_run_sup[i]);
    fmt::print(err, "wrote {}\n", p.string());
  }
  return kExitOk;
}

int cmd_ar1(const Common& c, std::ostream& out, std::ostream& err) {
  for (auto cfg : configs_from_tree(base_tree(c))) {
    cfg.keep_trajectories = true;
    cfg.record_stride = 1;
    const std::int64_t window = cfg.ar1.window > 0 ? std::min(cfg.ar1.window, cfg.steps) : cfg.steps;
    cfg.steps = window;
    fmt::print(err, "{}: {} runs of {} steps\n", cfg.name, cfg.runs, cfg.steps);
    const auto res = run_ensemble(cfg);
    const double s = cfg.ar1.sqrt_n_scale ? std::sqrt(static_cast<double>(cfg.model.n)) : 1.0;
    std::vector<std::vector<double>> series;
    fmt::print(out, "# {}\nrun\tdrift\tdrift_se\tvolatility\n", cfg.name);
    json rows = json::array();
    for (const auto& r : res.runs) {
      if (!r.trajectory) continue;
      auto col = r.trajectory->column(r.trajectory->schema().index(cfg.ar1.coordinate));
      for (double& v : col) v *= s;
      const auto f = fit_ar1(col, cfg.delta());
      fmt::print(out, "{}\t{:.6g}\t{:.3g}\t{:.6g}\n", r.index, f.drift, f.drift_se, f.volatility);
      rows.push_back({{"run", r.index}, {"drift", f.drift}, {"drift_se", f.drift_se}, {"volatility", f.volatility}});
      series.push_back(std::move(col));
    }
    const auto pooled = fit_ar1_pooled(series, cfg.delta());
    fmt::print(out, "pooled\t{:.6g}\t{:.3g}\t{:.6g}\n", pooled.drift, pooled.drift_se, pooled.volatility);
    const fs::path p = out_dir(c) / (cfg.name + ".ar1.json");
    write_json(p, {{"config", to_json(cfg)},
                   {"runs", rows},
                   {"pooled", {{"drift", pooled.drift}, {"drift_se", pooled.drift_se}, {"volatility", pooled.volatility}}}});
    fmt::print(err, "wrote {}\n", p.string());
  }
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scaling-limit experiments for online SGD", "sgdlab"};
  app.require_subcommand(1);
  Common common;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<const char*, const char*>> names = {
      {"simulate", "run an SGD ensemble and export endpoints"},
      {"basin", "basin fractions of an SGD ensemble"},
      {"limit-ode", "integrate a ballistic limit"},
      {"limit-sde", "simulate a diffusive limit"},
      {"fixed-points", "list fixed points with stability"},
      {"drift-check", "one-step drift and covariance against the limit"},
      {"compare", "ensemble mean against the ballistic limit"},
      {"ar1", "AR(1) fits on a recorded coordinate"}};
  for (const auto& [name, help] : names) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], common);
  }
  // Shortcuts for the fixed-point table.
  std::string model;
  int k = 0, Kw = 0;
  double lambda = 0, c_delta = 0, alpha = 0;
  auto* fp = subs["fixed-points"];
  auto* o_model = fp->add_option("--model", model, "tensor, bgmm or xor");
  auto* o_k = fp->add_option("--k", k, "tensor order");
  auto* o_K = fp->add_option("--K", Kw, "XOR width");
  auto* o_lambda = fp->add_option("--lambda", lambda, "signal-to-noise ratio");
  auto* o_cd = fp->add_option("--c-delta", c_delta, "step-size constant");
  auto* o_alpha = fp->add_option("--alpha", alpha, "L2 penalty");

  int sp_K = 4;
  bool enumerate = false;
  auto* sp = app.add_subcommand("success-prob", "exact XOR success probability");
  sp->add_option("--K", sp_K, "hidden units (>= 4)");
  sp->add_flag("--enumerate", enumerate, "cross-check by sign-pattern enumeration");

  std::vector<std::string> argv_store{"sgdlab"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (auto& [name, sub] : subs)
    if (sub->parsed()) common.active = sub;
  try {
    if (sp->parsed()) {
      const auto p = xor_success_probability(sp_K);
      fmt::print(out, "{} {}\n", p.str(), p.approx);
      if (enumerate) {
        const auto q = xor_success_probability_enumerated(sp_K);
        fmt::print(out, "enumerated {} {}\n", q.str(), q.value == p.value ? "match" : "MISMATCH");
        if (q.value != p.value) return kExitDomain;
      }
      return kExitOk;
    }
    if (fp->parsed()) {
      if (o_model->count()) common.sets.push_back("model.family=\"" + model + "\"");
      if (o_k->count()) common.sets.push_back(fmt::format("model.k={}", k));
      if (o_K->count()) common.sets.push_back(fmt::format("model.K={}", Kw));
      if (o_lambda->count()) common.sets.push_back(fmt::format("model.lambda={}", lambda));
      if (o_cd->count()) common.sets.push_back(fmt::format("c_delta={}", c_delta));
      if (o_alpha->count()) common.sets.push_back(fmt::format("model.alpha={}", alpha));
      return cmd_fixed_points(common, out);
    }
    if (subs["simulate"]->parsed()) return cmd_simulate(common, out, err, false);
    if (subs["basin"]->parsed()) return cmd_simulate(common, out, err, true);
    if (subs["limit-ode"]->parsed()) return cmd_limit_ode(common, out, err);
    if (subs["limit-sde"]->parsed()) return cmd_limit_sde(common, out, err);
    if (subs["drift-check"]->parsed()) return cmd_drift_check(common, out, err);
    if (subs["compare"]->parsed()) return cmd_compare(common, out, err);
    if (subs["ar1"]->parsed()) return cmd_ar1(common, out, err);
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitDomain;
  }
  return kExitConfig;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace sgdlab::cli
