#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace sk {

/// Quadrature rule for expectations against the standard normal density:
/// E[f(Z)] ~ sum_i weights[i] * f(nodes[i]), weights normalized to 1.
struct QuadContext {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int order() const { return static_cast<int>(nodes.size()); }

  /// Gauss–Hermite rule mapped to the standard normal weight
  /// (Golub–Welsch on the Jacobi matrix, then z = sqrt(2) t, w /= sqrt(pi)).
  static QuadContext gauss_hermite(int order);

  /// Checks weight normalization (1e-12) and E[Z^2]=1 (1e-10).
  void validate() const;
};

/// Default rule shared by the scalar modules (order 80).
const QuadContext& default_quad();

/// Composite Gauss-Legendre rule (normal density folded into the weights)
/// for integrands of the form f(aZ + b) whose features sit near aZ + b = 0
/// on dyadic scales.  Plain Gauss-Hermite misses features narrower than its
/// node spacing, which happens as soon as a is a few units; this rule places
/// panel edges at z = (+-2^j - b)/a as well as across the Gaussian bulk.
QuadContext field_aligned_rule(double a, double b, int per_panel = 40);

/// E[f(aZ + b)]: exact for a = 0, the supplied rule for small a, the
/// feature-aligned rule otherwise.
template <class F>
double expect_field(F&& f, double a, double b, const QuadContext& ctx) {
  if (a == 0.0) return f(b);
  if (a <= 1.0)
    return gauss_expect([&](double z) { return f(a * z + b); }, ctx);
  const QuadContext aligned = field_aligned_rule(a, b);
  return gauss_expect([&](double z) { return f(a * z + b); }, aligned);
}

/// E[f(Z)] by the given rule. Throws std::domain_error naming the first node
/// where f is non-finite.
template <class F>
double gauss_expect(F&& f, const QuadContext& ctx) {
  double acc = 0.0;
  const int n = ctx.order();
  for (int i = 0; i < n; ++i) {
    const double v = f(ctx.nodes[i]);
    if (!std::isfinite(v)) {
      throw std::domain_error("gauss_expect: non-finite integrand at node " +
                              std::to_string(i) + " (x=" +
                              std::to_string(ctx.nodes[i]) + ")");
    }
    acc += ctx.weights[i] * v;
  }
  return acc;
}

/// 2-D tensor expectation E[f(Z, Z')] over independent standard normals.
template <class F>
double gauss_expect2(F&& f, const QuadContext& ctx) {
  double acc = 0.0;
  const int n = ctx.order();
  for (int i = 0; i < n; ++i) {
    double inner = 0.0;
    for (int j = 0; j < n; ++j) inner += ctx.weights[j] * f(ctx.nodes[i], ctx.nodes[j]);
    if (!std::isfinite(inner)) {
      throw std::domain_error("gauss_expect2: non-finite inner expectation at outer node " +
                              std::to_string(i));
    }
    acc += ctx.weights[i] * inner;
  }
  return acc;
}

/// erfc under the variance-1 convention: erfc(z) = 2 * P(Z > z).
/// Equals std::erfc(z / sqrt(2)); erfc(0) = 1.
double erfc_scaled(double z);

/// e^{z^2/2} * erfc_scaled(z), stable for large z (no under/overflow).
double erfc_scaled_exp(double z);

/// Two-sided envelope of sqrt(pi/2) e^{z^2/2} erfc_scaled(z) for z >= 0.
double erfc_bound_lower(double z);  // 2 / (z + sqrt(z^2 + 4))
double erfc_bound_upper(double z);  // 2 / (z + sqrt(z^2 + 8/pi))

/// E|aZ + b| for a > 0, b >= 0.
double abs_gauss_moment(double a, double b);

/// E e^{-|aZ + b|} via the t^-/t^+ split, a > 0, b >= 0.
double exp_abs_gauss(double a, double b);

/// E |aZ + b| e^{-|aZ + b|} (Gaussian integration by parts form), a > 0, b >= 0.
double weighted_exp_abs_gauss(double a, double b);

/// The pair (t^-_{a,b}, t^+_{a,b}) entering the two closed forms above.
std::pair<double, double> exp_abs_gauss_terms(double a, double b);

}  // namespace sk
