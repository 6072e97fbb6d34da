#include "sgdlab/harness/export.hpp"

#include <fstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot open '{}' for writing", p.string()));
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& p) {
  os.flush();
  if (!os) throw IoError(fmt::format("write to '{}' failed", p.string()));
}

nlohmann::json fraction_json(const Fraction& f) {
  return {{"label", f.label}, {"count", f.count}, {"fraction", f.fraction}, {"se", f.se}};
}

}  // namespace

nlohmann::json fractions_json(const EnsembleResult& r) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& run : r.runs)
    seeds.push_back({{"run", run.index}, {"master_seed", r.config.master_seed}, {"stream", run.stream}});
  nlohmann::json fr = nlohmann::json::array();
  for (const auto& f : r.fractions) fr.push_back(fraction_json(f));
  nlohmann::json j = {{"name", r.config.name},
                      {"master_seed", r.config.master_seed},
                      {"config", to_json(r.config)},
                      {"runs", r.runs.size()},
                      {"diverged", r.diverged},
                      {"fractions", fr},
                      {"stable", fraction_json(r.stable)},
                      {"seeds", seeds}};
  if (r.sign_rule) j["sign_rule"] = fraction_json(*r.sign_rule);
  if (r.config.model.family != ModelFamily::tensor_pca && r.config.init.kind == InitSpec::Kind::warm)
    j["notes"] = "warm start: W_perp drawn isotropically in the complement of the means with Gram equal to the target R";
  return j;
}

void write_runs_csv(std::ostream& os, const EnsembleResult& r) {
  os << "run,stream,label,diverged_step,sign_rule";
  for (const auto& n : r.schema.names()) os << ',' << n;
  os << '\n';
  for (const auto& run : r.runs) {
    fmt::print(os, "{},{},\"{}\",", run.index, run.stream, run.label);
    if (run.diverged_step) os << *run.diverged_step;
    os << ',';
    if (run.sign_rule) os << (*run.sign_rule ? 1 : 0);
    if (run.endpoint) {
      for (double x : run.endpoint->values()) fmt::print(os, ",{:.17g}", x);
    } else {
      for (std::size_t j = 0; j < r.schema.size(); ++j) os << ',';
    }
    os << '\n';
  }
}

void write_compare_csv(std::ostream& os, const CompareReport& c) {
  os << 't';
  for (const auto& n : c.limit.schema().names()) os << ",limit_" << n;
  for (const auto& n : c.mean.schema().names()) os << ",sim_" << n;
  os << '\n';
  std::vector<double> lim(c.limit.dim());
  for (std::size_t i = 0; i < c.mean.size(); ++i) {
    const double t = c.mean.times()[i];
    if (t < c.t0 || t > c.t1) continue;
    interpolate_into(c.limit, t, lim);
    fmt::print(os, "{:.17g}", t);
    for (double x : lim) fmt::print(os, ",{:.17g}", x);
    for (double x : c.mean.row(i)) fmt::print(os, ",{:.17g}", x);
    os << '\n';
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
  finish(os, path);
}

std::vector<std::filesystem::path> export_ensemble(const EnsembleResult& r,
                                                   const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  const auto runs = dir / (r.config.name + ".runs.csv");
  auto os = open_out(runs);
  write_runs_csv(os, r);
  finish(os, runs);
  out.push_back(runs);
  const auto fr = dir / (r.config.name + ".fractions.json");
  write_json(fr, fractions_json(r));
  out.push_back(fr);
  for (const auto& run : r.runs) {
    if (!run.trajectory) continue;
    const auto p = dir / fmt::format("{}.run{}.csv", r.config.name, run.index);
    write_csv(p, *run.trajectory);
    out.push_back(p);
  }
  return out;
}

std::filesystem::path export_compare(const CompareReport& c, const std::filesystem::path& dir,
                                     const std::string& name) {
  const auto p = dir / (name + ".compare.csv");
  auto os = open_out(p);
  write_compare_csv(os, c);
  finish(os, p);
  write_json(dir / (name + ".compare.json"),
             {{"mode", c.mode == MatchMode::mean ? "mean" : "per_run"},
              {"t0", c.t0},
              {"t1", c.t1},
              {"mean_sup", c.mean_sup},
              {"per_run_sup", c.per_run_sup}});
  return p;
}

}  // namespace sgdlab
