#include "sgdlab/harness/one_step.hpp"

#include <cmath>

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

DriftEstimate estimate_one_step(const AnyModel& model, const ParamPoint& x, double delta, int M,
                                RngStream& rng, std::span<const double> scale) {
  if (M < 100) throw RangeError("estimate_one_step needs M >= 100");
  if (!(delta > 0)) throw DomainError("delta must be positive");
  const SummaryVec u0 = summary(model, x);
  const std::size_t d = u0.size();
  if (!scale.empty() && scale.size() != d) throw SchemaError("scale must have one entry per coordinate");
  auto s = [&](std::size_t j) { return scale.empty() ? 1.0 : scale[j]; };

  Eigen::MatrixXd D(M, static_cast<Eigen::Index>(d));
  ParamPoint y = x;
  for (int i = 0; i < M; ++i) {
    const Datum datum = sample_datum(model, rng);
    const auto g = grad_loss(model, x, datum);
    for (std::size_t j = 0; j < g.size(); ++j) y.theta[j] = x.theta[j] - delta * g[j];
    const SummaryVec u1 = summary(model, y);
    for (std::size_t j = 0; j < d; ++j) D(i, static_cast<Eigen::Index>(j)) = s(j) * (u1[j] - u0[j]);
  }

  DriftEstimate est{u0, {}, {}, {}, {}, M};
  const Eigen::RowVectorXd mu = D.colwise().mean();
  const Eigen::MatrixXd C = D.rowwise() - mu;
  const double m = M;
  est.cov = (C.transpose() * C) / ((m - 1) * delta);
  est.cov = 0.5 * (est.cov + est.cov.transpose()).eval();
  est.cov_se.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index a = 0; a < C.cols(); ++a) {
    est.mean.push_back(mu(a) / delta);
    est.mean_se.push_back(std::sqrt(est.cov(a, a) * delta / m) / delta);
    for (Eigen::Index b = 0; b <= a; ++b) {
      const Eigen::ArrayXd p = C.col(a).array() * C.col(b).array();
      const double pm = p.mean();
      const double var = (p - pm).square().sum() / (m - 1);
      est.cov_se(a, b) = est.cov_se(b, a) = std::sqrt(var / m) / delta;
    }
  }
  return est;
}

}  // namespace sgdlab
