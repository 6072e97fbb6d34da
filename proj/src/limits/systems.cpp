#include "sgdlab/limits/systems.hpp"

#include "sgdlab/core/errors.hpp"

namespace sgdlab {

SummaryVec evaluate(const OdeSystem& sys, const SummaryVec& u) {
  require_same_schema(sys.schema, u.schema(), "OdeSystem");
  std::vector<double> out(u.size());
  sys.rhs(u.span(), out);
  return SummaryVec(sys.schema, std::move(out));
}

SummaryVec evaluate_drift(const SdeSystem& sys, const SummaryVec& u) {
  require_same_schema(sys.schema, u.schema(), "SdeSystem");
  std::vector<double> out(u.size());
  sys.drift(u.span(), out);
  return SummaryVec(sys.schema, std::move(out));
}

Eigen::MatrixXd diffusion_matrix(const SdeSystem& sys, const SummaryVec& u) {
  require_same_schema(sys.schema, u.schema(), "SdeSystem");
  const Eigen::MatrixXd f = sys.diffusion_factor(u.span());
  return f * f.transpose();
}

}  // namespace sgdlab
