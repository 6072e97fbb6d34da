#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "sgdlab/core/summary.hpp"

namespace sgdlab {

// Time-indexed summary path, stored row-major. Rows are appended in time order
// and the first row must sit at t = 0.
class Trajectory {
 public:
  explicit Trajectory(Schema schema);

  void append(double t, std::span<const double> values);
  void append(double t, const SummaryVec& u);
  void reserve(std::size_t rows);

  const Schema& schema() const { return schema_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  std::size_t dim() const { return schema_.size(); }
  const std::vector<double>& times() const { return times_; }
  double t_end() const;
  std::span<const double> row(std::size_t i) const;
  SummaryVec point(std::size_t i) const;
  SummaryVec back() const { return point(size() - 1); }
  std::vector<double> column(std::size_t j) const;
  const std::vector<double>& data() const { return data_; }

 private:
  Schema schema_;
  std::vector<double> times_;
  std::vector<double> data_;
};

SummaryVec interpolate(const Trajectory& traj, double t);
void interpolate_into(const Trajectory& traj, double t, std::span<double> out);

inline constexpr int kDefaultSupGrid = 1000;
double sup_distance(const Trajectory& a, const Trajectory& b, double t0, double t1,
                    int grid = kDefaultSupGrid);

// Pointwise mean of trajectories recorded on identical time grids.
Trajectory mean_trajectory(std::span<const Trajectory> trajs);

void write_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_csv(std::istream& is);
void write_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_csv(const std::filesystem::path& path);

}  // namespace sgdlab
