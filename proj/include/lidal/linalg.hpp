#pragma once

#include <Eigen/Dense>

namespace lidal {

/// Solves (A + mu I) x = b for symmetric positive semidefinite A via Cholesky.
/// Returns false when the shifted matrix is not positive definite. Uses
/// LAPACK's dpotrf/dpotrs when the build found it, Eigen's LLT otherwise.
bool spd_solve(const Eigen::MatrixXd& A, double mu, const Eigen::VectorXd& b, Eigen::VectorXd& x);

}  // namespace lidal
