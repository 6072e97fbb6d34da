#include "sgdlab/core/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

Trajectory::Trajectory(Schema schema) : schema_(std::move(schema)) {}

void Trajectory::reserve(std::size_t rows) {
  times_.reserve(rows);
  data_.reserve(rows * dim());
}

void Trajectory::append(double t, std::span<const double> values) {
  if (values.size() != dim())
    throw SchemaError(fmt::format("trajectory row has {} values, schema has {}", values.size(), dim()));
  if (times_.empty()) {
    if (t != 0.0) throw RangeError(fmt::format("trajectory must start at t=0, got {}", t));
  } else if (!(t > times_.back())) {
    throw RangeError(fmt::format("trajectory times must increase ({} after {})", t, times_.back()));
  }
  for (std::size_t j = 0; j < values.size(); ++j)
    if (!std::isfinite(values[j]))
      throw DomainError(fmt::format("non-finite trajectory value '{}' at t={}", schema_[j], t));
  times_.push_back(t);
  data_.insert(data_.end(), values.begin(), values.end());
}

void Trajectory::append(double t, const SummaryVec& u) {
  require_same_schema(schema_, u.schema(), "Trajectory::append");
  append(t, u.span());
}

double Trajectory::t_end() const {
  if (times_.empty()) throw RangeError("empty trajectory");
  return times_.back();
}

std::span<const double> Trajectory::row(std::size_t i) const {
  return {data_.data() + i * dim(), dim()};
}

SummaryVec Trajectory::point(std::size_t i) const {
  auto r = row(i);
  return SummaryVec(schema_, std::vector<double>(r.begin(), r.end()));
}

std::vector<double> Trajectory::column(std::size_t j) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = data_[i * dim() + j];
  return out;
}

void interpolate_into(const Trajectory& traj, double t, std::span<double> out) {
  if (traj.empty()) throw RangeError("interpolate on empty trajectory");
  const auto& ts = traj.times();
  if (!(t >= 0.0 && t <= ts.back()))
    throw RangeError(fmt::format("interpolation time {} outside [0, {}]", t, ts.back()));
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - ts.begin());
  if (ts[hi] == t) {
    auto r = traj.row(hi);
    std::copy(r.begin(), r.end(), out.begin());
    return;
  }
  std::size_t lo = hi - 1;
  double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
  auto a = traj.row(lo);
  auto b = traj.row(hi);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = a[j] + w * (b[j] - a[j]);
}

SummaryVec interpolate(const Trajectory& traj, double t) {
  std::vector<double> v(traj.dim());
  interpolate_into(traj, t, v);
  return SummaryVec(traj.schema(), std::move(v));
}

double sup_distance(const Trajectory& a, const Trajectory& b, double t0, double t1, int grid) {
  require_same_schema(a.schema(), b.schema(), "sup_distance");
  if (grid < 2) throw RangeError("sup_distance grid needs at least 2 points");
  if (!(t0 >= 0.0 && t1 >= t0) || a.empty() || b.empty() || t1 > a.t_end() || t1 > b.t_end())
    throw RangeError(fmt::format("window [{}, {}] not covered by both trajectories", t0, t1));
  std::vector<double> ua(a.dim()), ub(b.dim());
  double best = 0;
  for (int i = 0; i < grid; ++i) {
    double t = i == grid - 1 ? t1 : t0 + (t1 - t0) * i / (grid - 1);
    interpolate_into(a, t, ua);
    interpolate_into(b, t, ub);
    double s = 0;
    for (std::size_t j = 0; j < ua.size(); ++j) s += (ua[j] - ub[j]) * (ua[j] - ub[j]);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

Trajectory mean_trajectory(std::span<const Trajectory> trajs) {
  if (trajs.empty()) throw RangeError("mean of zero trajectories");
  const Trajectory& first = trajs.front();
  for (const auto& t : trajs) {
    require_same_schema(first.schema(), t.schema(), "mean_trajectory");
    if (t.times() != first.times()) throw RangeError("mean_trajectory needs identical time grids");
  }
  Trajectory out(first.schema());
  out.reserve(first.size());
  std::vector<double> row(first.dim());
  for (std::size_t i = 0; i < first.size(); ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (const auto& t : trajs) {
      auto r = t.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += r[j];
    }
    for (double& x : row) x /= static_cast<double>(trajs.size());
    out.append(first.times()[i], row);
  }
  return out;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  std::string line = "t";
  for (const auto& n : traj.schema().names()) line += "," + n;
  os << line << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    line = fmt::format("{:.17g}", traj.times()[i]);
    for (double v : traj.row(i)) fmt::format_to(std::back_inserter(line), ",{:.17g}", v);
    os << line << '\n';
  }
}

Trajectory read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty trajectory CSV");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    if (cell != "t") throw IoError("trajectory CSV header must start with 't'");
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  Trajectory traj{Schema(std::move(names))};
  std::vector<double> row(traj.dim());
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    double t = std::stod(cell);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!std::getline(ss, cell, ','))
        throw IoError(fmt::format("trajectory CSV line {} is short", lineno));
      row[j] = std::stod(cell);
    }
    traj.append(t, row);
  }
  return traj;
}

void write_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  write_csv(os, traj);
  if (!os) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

Trajectory read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return read_csv(is);
}

}  // namespace sgdlab
