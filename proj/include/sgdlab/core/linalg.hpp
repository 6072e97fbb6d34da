#pragma once

#include <Eigen/Dense>

namespace sgdlab {

inline constexpr double kPsdClampTol = 1e-10;

// Symmetric PSD square root through an eigen-decomposition. Eigenvalues in
// [-clamp_tol, 0) are treated as zero; anything below throws NotPsdError.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, double clamp_tol = kPsdClampTol);

double min_eigenvalue(const Eigen::MatrixXd& m);
int numerical_rank(const Eigen::MatrixXd& m, double tol);

}  // namespace sgdlab
