#include "sgdlab/core/linalg.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, double clamp_tol) {
  if (m.rows() != m.cols()) throw DomainError("psd_sqrt needs a square matrix");
  if (m.size() == 0) return m;
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw DomainError(fmt::format("psd_sqrt input not symmetric (max asymmetry {:.3g})", asym));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  Eigen::VectorXd ev = es.eigenvalues();
  // Eigenvalues at roundoff level are zero; their square roots would not be.
  const double noise = 4.0 * static_cast<double>(ev.size()) * std::numeric_limits<double>::epsilon() *
                       ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -clamp_tol)
      throw NotPsdError(fmt::format("matrix not PSD: eigenvalue {:.6g}", ev[i]));
    ev[i] = ev[i] > noise ? std::sqrt(ev[i]) : 0.0;
  }
  const auto& q = es.eigenvectors();
  Eigen::MatrixXd s = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

int numerical_rank(const Eigen::MatrixXd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  int r = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i]) > tol) ++r;
  return r;
}

}  // namespace sgdlab
