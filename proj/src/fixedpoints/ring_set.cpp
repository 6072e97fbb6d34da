#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/fixedpoints/fixed_points.hpp"
#include "sgdlab/models/two_layer.hpp"

namespace sgdlab {

std::string_view stability_name(Stability s) { return s == Stability::stable ? "stable" : "unstable"; }

namespace {

// Closest point of {a >= 0, |a|^2 = C} to q.
void project_positive_sphere(std::vector<double>& q, double C) {
  double n2 = 0;
  for (double x : q) n2 += x > 0 ? x * x : 0.0;
  if (n2 > 0) {
    const double s = std::sqrt(C / n2);
    for (double& x : q) x = x > 0 ? x * s : 0.0;
    return;
  }
  const auto best = std::max_element(q.begin(), q.end());
  const auto at = best - q.begin();
  std::fill(q.begin(), q.end(), 0.0);
  q[static_cast<std::size_t>(at)] = std::sqrt(C);
}

}  // namespace

double RingPiece::distance(std::span<const double> u) const {
  if (u.size() != offset.size()) throw SchemaError("ring piece dimension mismatch");
  std::vector<double> w(u.size());
  double d2 = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    w[j] = u[j] - offset[j];
    d2 += w[j] * w[j];
  }
  if (units.empty()) return std::sqrt(d2);
  const double n = static_cast<double>(units.front().dir.size());
  std::vector<std::vector<double>> q(static_cast<std::size_t>(blocks));
  std::vector<std::vector<double>> qi(static_cast<std::size_t>(blocks));
  for (const Unit& un : units) {
    if (static_cast<double>(un.dir.size()) != n) throw DomainError("ring directions must have equal norms");
    double dot = 0;
    for (auto [j, s] : un.dir) dot += s * w[static_cast<std::size_t>(j)];
    q[static_cast<std::size_t>(un.block)].push_back(dot / n);
  }
  for (int b = 0; b < blocks; ++b) {
    auto& qb = q[static_cast<std::size_t>(b)];
    if (qb.empty()) continue;
    std::vector<double> a = qb;
    project_positive_sphere(a, C);
    for (std::size_t i = 0; i < qb.size(); ++i) d2 += n * ((a[i] - qb[i]) * (a[i] - qb[i]) - qb[i] * qb[i]);
  }
  return std::sqrt(std::max(d2, 0.0));
}

std::vector<double> RingPiece::center() const {
  std::vector<double> out = offset;
  std::vector<int> size(static_cast<std::size_t>(blocks), 0);
  for (const Unit& un : units) ++size[static_cast<std::size_t>(un.block)];
  for (const Unit& un : units) {
    const double a = std::sqrt(C / size[static_cast<std::size_t>(un.block)]);
    for (auto [j, s] : un.dir) out[static_cast<std::size_t>(j)] += s * a;
  }
  return out;
}

std::vector<double> RingPiece::sample(RngStream& rng) const {
  std::vector<double> a(units.size());
  std::vector<double> n2(static_cast<std::size_t>(blocks), 0.0);
  for (std::size_t i = 0; i < units.size(); ++i) {
    a[i] = std::abs(rng.normal()) + 1e-3;
    n2[static_cast<std::size_t>(units[i].block)] += a[i] * a[i];
  }
  std::vector<double> out = offset;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const double ai = a[i] * std::sqrt(C / n2[static_cast<std::size_t>(units[i].block)]);
    for (auto [j, s] : units[i].dir) out[static_cast<std::size_t>(j)] += s * ai;
  }
  return out;
}

double FixedPointRecord::distance(const SummaryVec& u) const {
  require_same_schema(u.schema(), schema, "fixed point distance");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) best = std::min(best, p.distance(u.span()));
  return best;
}

SummaryVec FixedPointRecord::representative() const {
  return SummaryVec(schema, pieces.front().center());
}

std::string classify_endpoint(const SummaryVec& u, const std::vector<FixedPointRecord>& fps,
                              double eps) {
  const FixedPointRecord* best = nullptr;
  double bd = std::numeric_limits<double>::infinity();
  for (const auto& fp : fps) {
    const double d = fp.distance(u);
    if (d < bd) {
      bd = d;
      best = &fp;
    }
  }
  return best && bd <= eps ? best->label : std::string("unresolved");
}

bool bgmm_sign_rule(const SummaryVec& u) { return u.at("m1") * u.at("m2") < 0; }

bool xor_sign_rule(const SummaryVec& u, int K, double tol) {
  if (u.size() != xor_schema(K).size()) throw SchemaError("xor_sign_rule: schema does not match K");
  unsigned mask = 0;
  for (int i = 0; i < K; ++i) {
    const double v = u[i], mm = u[K + i], mn = u[2 * K + i];
    if (v > tol && std::abs(mm) > tol) mask |= mm > 0 ? 1u : 2u;
    if (v < -tol && std::abs(mn) > tol) mask |= mn > 0 ? 4u : 8u;
  }
  return mask == 0xF;
}

double max_residual(const FixedPointRecord& rec, const OdeSystem& sys, RngStream& rng,
                    int samples_per_piece) {
  require_same_schema(rec.schema, sys.schema, "max_residual");
  std::vector<double> out(rec.schema.size());
  double worst = 0;
  auto check = [&](const std::vector<double>& u) {
    sys.rhs(u, out);
    worst = std::max(worst, norm(out));
  };
  for (const auto& p : rec.pieces) {
    check(p.center());
    if (!p.units.empty())
      for (int s = 0; s < samples_per_piece; ++s) check(p.sample(rng));
  }
  return worst;
}

}  // namespace sgdlab
