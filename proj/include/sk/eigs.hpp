#pragma once

#include <Eigen/Dense>

#include <functional>

namespace sk {

struct EigenExtremes {
  double lambda_min;
  double lambda_max;
};

/// Extreme eigenvalues of a symmetric operator given by its matvec.
/// Lanczos with full reorthogonalization; residual-based stopping at relative
/// tolerance tol.  Throws std::runtime_error on non-convergence.
EigenExtremes extreme_eigenvalues(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
                                  int n, double tol, int max_iters = 0);

/// Dense path for small n, Lanczos above the crossover.
EigenExtremes extreme_eigenvalues(const Eigen::MatrixXd& m, double tol,
                                  int dense_threshold = 200);

}  // namespace sk
