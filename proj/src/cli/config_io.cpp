#include "sgdlab/cli/config_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "sgdlab/cli/presets.hpp"
#include "sgdlab/core/errors.hpp"

namespace sgdlab::cli {

using nlohmann::json;

namespace {

json from_toml(const toml::node& node, const std::string& where) {
  if (auto t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) {
      const std::string key(k.str());
      out[key] = from_toml(v, where.empty() ? key : where + "." + key);
    }
    return out;
  }
  if (auto a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(from_toml(v, where));
    return out;
  }
  if (auto s = node.as_string()) return s->get();
  if (auto i = node.as_integer()) return i->get();
  if (auto f = node.as_floating_point()) return f->get();
  if (auto b = node.as_boolean()) return b->get();
  throw ConfigError(fmt::format("unsupported TOML value type at '{}'", where));
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ConfigError(fmt::format("'{}' must be a table", where.empty() ? "<root>" : where));
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) throw ConfigError(fmt::format("unknown config key '{}'", join(where, k)));
}

double get_double(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(fmt::format("'{}' must be a number", key));
}

std::int64_t get_int(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw ConfigError(fmt::format("'{}' must be an integer", key));
}

int get_int32(const json& v, const std::string& key) {
  const auto x = get_int(v, key);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError(fmt::format("'{}' is out of range", key));
  return static_cast<int>(x);
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(fmt::format("'{}' must be true or false", key));
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(fmt::format("'{}' must be a string", key));
  return v.get<std::string>();
}

std::vector<double> get_doubles(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(fmt::format("'{}' must be an array of numbers", key));
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_double(x, key));
  return out;
}

std::string sweep_suffix(const std::string& key, const json& value) {
  const auto leaf = key.substr(key.rfind('.') + 1);
  if (value.is_number()) return fmt::format("{}{:g}", leaf, value.get<double>());
  if (value.is_string()) return leaf + value.get<std::string>();
  return leaf + value.dump();
}

}  // namespace

nlohmann::json parse_config_text(std::string_view text, bool is_json, std::string_view origin) {
  if (is_json) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(fmt::format("{}: {}", origin, e.what()));
    }
  }
  try {
    const toml::table t = toml::parse(text, origin);
    return from_toml(t, "");
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.description()));
  }
}

nlohmann::json load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path.extension() == ".json", path.string());
}

nlohmann::json preset_tree(std::string_view name) {
  std::vector<std::string> names;
  for (const auto& [n, text] : preset_table()) {
    if (n == name) return parse_config_text(text, false, fmt::format("preset {}", name));
    names.emplace_back(n);
  }
  throw ConfigError(fmt::format("unknown preset '{}' (available: {})", name, fmt::join(names, ", ")));
}

void set_path(nlohmann::json& tree, std::string_view dotted, nlohmann::json value) {
  json* node = &tree;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string part(dotted.substr(start, dot == std::string_view::npos ? dotted.npos : dot - start));
    if (part.empty()) throw ConfigError(fmt::format("malformed key '{}'", dotted));
    if (!node->is_object()) throw ConfigError(fmt::format("'{}' does not name a table entry", dotted));
    if (dot == std::string_view::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

void apply_override(nlohmann::json& tree, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError(fmt::format("override '{}' must look like key=value", assignment));
  const std::string_view key = assignment.substr(0, eq);
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  set_path(tree, key, std::move(value));
}

ExperimentConfig config_from_tree(const nlohmann::json& root) {
  ExperimentConfig c;
  if (root.is_null()) return c;
  check_keys(root, "", {"name", "c_delta", "steps", "runs", "seed", "record_stride", "eps",
                        "keep_trajectories", "threads", "model", "init", "limit", "ar1", "drift", "sweep"});
  for (const auto& [k, v] : root.items()) {
    if (k == "name") c.name = get_string(v, k);
    else if (k == "c_delta") c.c_delta = get_double(v, k);
    else if (k == "steps") c.steps = get_int(v, k);
    else if (k == "runs") c.runs = get_int32(v, k);
    else if (k == "seed") {
      if (v.is_number_unsigned()) c.master_seed = v.get<std::uint64_t>();
      else {
        const auto s = get_int(v, k);
        if (s < 0) throw ConfigError("'seed' must be non-negative");
        c.master_seed = static_cast<std::uint64_t>(s);
      }
    }
    else if (k == "record_stride") c.record_stride = get_int(v, k);
    else if (k == "eps") c.eps = get_double(v, k);
    else if (k == "keep_trajectories") c.keep_trajectories = get_bool(v, k);
    else if (k == "threads") c.threads = get_int32(v, k);
  }
  if (root.contains("model")) {
    const json& m = root["model"];
    check_keys(m, "model", {"family", "n", "k", "K", "lambda", "alpha"});
    for (const auto& [k, v] : m.items()) {
      const std::string key = "model." + k;
      if (k == "family") c.model.family = parse_family(get_string(v, key));
      else if (k == "n") c.model.n = get_int32(v, key);
      else if (k == "k") c.model.k = get_int32(v, key);
      else if (k == "K") c.model.K = get_int32(v, key);
      else if (k == "lambda") c.model.lambda = get_double(v, key);
      else if (k == "alpha") c.model.alpha = get_double(v, key);
    }
  }
  if (root.contains("init")) {
    const json& in = root["init"];
    check_keys(in, "init", {"kind", "target"});
    if (in.contains("kind")) {
      const auto kind = get_string(in["kind"], "init.kind");
      if (kind == "random") c.init.kind = InitSpec::Kind::random;
      else if (kind == "warm") c.init.kind = InitSpec::Kind::warm;
      else throw ConfigError(fmt::format("'init.kind' must be random or warm, got '{}'", kind));
    }
    if (in.contains("target")) {
      const json& t = in["target"];
      if (!t.is_object()) throw ConfigError("'init.target' must be a table");
      for (const auto& [k, v] : t.items()) c.init.target.emplace_back(k, get_double(v, "init.target." + k));
    }
  }
  if (root.contains("limit")) {
    const json& l = root["limit"];
    check_keys(l, "limit", {"system", "t_end", "h", "record_stride", "paths", "mc_samples", "Lambda", "a",
                            "a_mu", "a_nu", "mode"});
    for (const auto& [k, v] : l.items()) {
      const std::string key = "limit." + k;
      if (k == "system") c.limit.system = get_string(v, key);
      else if (k == "t_end") c.limit.t_end = get_double(v, key);
      else if (k == "h") c.limit.h = get_double(v, key);
      else if (k == "record_stride") c.limit.record_stride = get_int(v, key);
      else if (k == "paths") c.limit.paths = get_int32(v, key);
      else if (k == "mc_samples") c.limit.mc_samples = get_int32(v, key);
      else if (k == "Lambda") c.limit.Lambda = get_double(v, key);
      else if (k == "a") c.limit.a = get_doubles(v, key);
      else if (k == "a_mu") c.limit.a_mu = get_doubles(v, key);
      else if (k == "a_nu") c.limit.a_nu = get_doubles(v, key);
      else if (k == "mode") {
        const auto mode = get_string(v, key);
        if (mode == "mean") c.limit.mode = MatchMode::mean;
        else if (mode == "per_run" || mode == "per-run") c.limit.mode = MatchMode::per_run;
        else throw ConfigError(fmt::format("'limit.mode' must be mean or per_run, got '{}'", mode));
      }
    }
  }
  if (root.contains("ar1")) {
    const json& a = root["ar1"];
    check_keys(a, "ar1", {"coordinate", "sqrt_n_scale", "window"});
    for (const auto& [k, v] : a.items()) {
      const std::string key = "ar1." + k;
      if (k == "coordinate") c.ar1.coordinate = get_string(v, key);
      else if (k == "sqrt_n_scale") c.ar1.sqrt_n_scale = get_bool(v, key);
      else if (k == "window") c.ar1.window = get_int(v, key);
    }
  }
  if (root.contains("drift")) {
    const json& d = root["drift"];
    check_keys(d, "drift", {"samples", "sqrt_n_scaled"});
    for (const auto& [k, v] : d.items()) {
      const std::string key = "drift." + k;
      if (k == "samples") c.drift.samples = get_int32(v, key);
      else if (k == "sqrt_n_scaled") {
        if (!v.is_array()) throw ConfigError(fmt::format("'{}' must be an array of names", key));
        for (const auto& s : v) c.drift.sqrt_n_scaled.push_back(get_string(s, key));
      }
    }
  }
  c.validate();
  return c;
}

std::vector<ExperimentConfig> configs_from_tree(const nlohmann::json& tree) {
  if (!tree.is_object() || !tree.contains("sweep")) return {config_from_tree(tree)};
  const json& sw = tree["sweep"];
  check_keys(sw, "sweep", {"key", "values"});
  if (!sw.contains("key") || !sw.contains("values") || !sw["values"].is_array() || sw["values"].empty())
    throw ConfigError("'sweep' needs a key and a non-empty values array");
  const std::string key = get_string(sw["key"], "sweep.key");
  if (key.starts_with("sweep")) throw ConfigError("'sweep.key' cannot point into the sweep block");
  std::vector<ExperimentConfig> out;
  for (const auto& value : sw["values"]) {
    json t = tree;
    t.erase("sweep");
    set_path(t, key, value);
    const std::string base = t.contains("name") && t["name"].is_string() ? t["name"].get<std::string>() : "experiment";
    t["name"] = base + "_" + sweep_suffix(key, value);
    out.push_back(config_from_tree(t));
  }
  return out;
}

}  // namespace sgdlab::cli
