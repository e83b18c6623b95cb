#include "sk/eigs.hpp"

#include "sk/rng.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <vector>

namespace sk {

EigenExtremes extreme_eigenvalues(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    int n, double tol, int max_iters) {
  if (n == 1) {
    Eigen::VectorXd e = Eigen::VectorXd::Ones(1), y(1);
    apply(e, y);
    return {y[0], y[0]};
  }
  if (max_iters <= 0) max_iters = std::min(n, 400);

  Eigen::MatrixXd basis(n, max_iters + 1);
  std::vector<double> alpha, beta;
  alpha.reserve(max_iters);
  beta.reserve(max_iters);

  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal_at(0x5EEDF00Dull, i);
  v /= v.norm();
  basis.col(0) = v;

  Eigen::VectorXd w(n);
  EigenExtremes out{0.0, 0.0};
  for (int j = 0; j < max_iters; ++j) {
    apply(basis.col(j), w);
    if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
    const double a = basis.col(j).dot(w);
    alpha.push_back(a);
    w -= a * basis.col(j);
    // two-pass reorthogonalization against the whole basis
    for (int pass = 0; pass < 2; ++pass)
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    const double b = w.norm();

    const int m = j + 1;
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const auto& ev = es.eigenvalues();
    out = {ev[0], ev[m - 1]};

    const double scale = std::max(std::abs(ev[0]), std::abs(ev[m - 1]));
    if (b < 1e-14 * std::max(scale, 1.0)) return out;  // invariant subspace
    if (m >= 3) {
      const double res_min = b * std::abs(es.eigenvectors()(m - 1, 0));
      const double res_max = b * std::abs(es.eigenvectors()(m - 1, m - 1));
      if (res_min <= tol * std::max(scale, 1e-300) &&
          res_max <= tol * std::max(scale, 1e-300))
        return out;
    }
    beta.push_back(b);
    basis.col(j + 1) = w / b;
  }
  throw std::runtime_error("extreme_eigenvalues: Lanczos did not converge within " +
                           std::to_string(max_iters) + " iterations");
}

EigenExtremes extreme_eigenvalues(const Eigen::MatrixXd& m, double tol,
                                  int dense_threshold) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw std::invalid_argument("extreme_eigenvalues: matrix must be square");
  if (n <= dense_threshold) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return {es.eigenvalues()[0], es.eigenvalues()[n - 1]};
  }
  return extreme_eigenvalues(
      [&m](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = m * x; }, n, tol);
}

}  // namespace sk
