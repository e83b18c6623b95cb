#include "sk/gauss.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <vector>

namespace sk {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
constexpr double kInvSqrtPi = 0.56418958354775628695;

// erfcx(x) = e^{x^2} erfc(x) for x >= 0.  Direct product below the overflow
// knee, asymptotic series above (12 terms suffice at x >= 12.5).
double erfcx_pos(double x) {
  if (x < 12.5) return std::exp(x * x) * std::erfc(x);
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 14; ++k) {
    term *= -(2 * k - 1) * inv2x2;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum * kInvSqrtPi / x;
}

}  // namespace

QuadContext QuadContext::gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be positive");
  // Jacobi matrix of the (orthonormal) Hermite recurrence, weight e^{-t^2}.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadContext ctx;
  ctx.nodes = kSqrt2 * es.eigenvalues();
  ctx.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    ctx.weights[i] = v0 * v0;  // mu0 = sqrt(pi) cancels against the normal normalization
  }
  ctx.weights /= ctx.weights.sum();
  return ctx;
}

void QuadContext::validate() const {
  if (nodes.size() != weights.size() || nodes.size() == 0)
    throw std::invalid_argument("QuadContext: node/weight size mismatch");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("QuadContext: weights do not sum to 1");
  const double m2 = weights.dot(nodes.cwiseProduct(nodes));
  if (std::abs(m2 - 1.0) > 1e-10)
    throw std::invalid_argument("QuadContext: second moment is not 1");
}

const QuadContext& default_quad() {
  static const QuadContext ctx = [] {
    QuadContext c = QuadContext::gauss_hermite(80);
    c.validate();
    return c;
  }();
  return ctx;
}

namespace {

void legendre_rule(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  nodes.resize(order);
  weights.resize(order);
  for (int i = 0; i < order; ++i) {
    nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = 2.0 * v0 * v0;
  }
}

}  // namespace

QuadContext field_aligned_rule(double a, double b, int per_panel) {
  if (!(a > 0.0)) throw std::invalid_argument("field_aligned_rule: a must be positive");
  constexpr double kZMax = 9.0;
  std::vector<double> breaks;
  for (int k = -9; k <= 9; ++k) breaks.push_back(static_cast<double>(k));
  // dyadic feature edges in the aZ + b variable, clipped to the bulk
  const double cover = std::abs(b) + a * kZMax + 1.0;
  breaks.push_back(-b / a);
  for (double u = 0.5; u <= cover; u *= 2.0) {
    for (double s : {-1.0, 1.0}) {
      const double z = (s * u - b) / a;
      if (z > -kZMax && z < kZMax) breaks.push_back(z);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  static const std::pair<std::vector<double>, std::vector<double>> gl40 = [] {
    std::vector<double> n, w;
    legendre_rule(40, n, w);
    return std::make_pair(n, w);
  }();
  std::vector<double> gl_nodes, gl_weights;
  if (per_panel == 40) {
    gl_nodes = gl40.first;
    gl_weights = gl40.second;
  } else {
    legendre_rule(per_panel, gl_nodes, gl_weights);
  }

  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  std::vector<double> xs, ws;
  xs.reserve((breaks.size() - 1) * per_panel);
  ws.reserve((breaks.size() - 1) * per_panel);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double lo = breaks[p], hi = breaks[p + 1];
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int i = 0; i < per_panel; ++i) {
      const double z = mid + half * gl_nodes[i];
      xs.push_back(z);
      ws.push_back(half * gl_weights[i] * kInvSqrt2Pi * std::exp(-0.5 * z * z));
    }
  }
  QuadContext ctx;
  ctx.nodes = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  ctx.weights = Eigen::Map<Eigen::VectorXd>(ws.data(), static_cast<Eigen::Index>(ws.size()));
  return ctx;
}

double erfc_scaled(double z) { return std::erfc(z / kSqrt2); }

double erfc_scaled_exp(double z) {
  if (z >= 0.0) return erfcx_pos(z / kSqrt2);
  // erfc(z) = 2 - erfc(-z); the e^{z^2/2} factor is harmless for moderate
  // negative z and the formulas here never need z << 0 at large magnitude.
  return std::exp(z * z / 2.0) * (2.0 - std::erfc(-z / kSqrt2));
}

double erfc_bound_lower(double z) { return 2.0 / (z + std::sqrt(z * z + 4.0)); }

double erfc_bound_upper(double z) {
  return 2.0 / (z + std::sqrt(z * z + 8.0 / M_PI));
}

double abs_gauss_moment(double a, double b) {
  if (a <= 0.0) throw std::invalid_argument("abs_gauss_moment: a must be > 0");
  if (b < 0.0) throw std::invalid_argument("abs_gauss_moment: b must be >= 0");
  const double r = b / a;
  return a * kSqrt2OverPi * std::exp(-0.5 * r * r) + b * (1.0 - erfc_scaled(r));
}

std::pair<double, double> exp_abs_gauss_terms(double a, double b) {
  if (a <= 0.0) throw std::invalid_argument("exp_abs_gauss: a must be > 0");
  if (b < 0.0) throw std::invalid_argument("exp_abs_gauss: b must be >= 0");
  const double r = b / a;
  // t+ = (1/2) e^{a^2/2 + b} erfc(r + a); the exponent collapses to -r^2/2
  // against the scaled erfc, which keeps both factors representable.
  const double tp = 0.5 * std::exp(-0.5 * r * r) * erfc_scaled_exp(r + a);
  double tm;
  if (a <= r) {
    // indicator branch -b/a + a <= 0
    tm = std::exp(0.5 * a * a - b) * (1.0 - 0.5 * erfc_scaled(r - a));
  } else {
    tm = 0.5 * std::exp(-0.5 * r * r) * erfc_scaled_exp(a - r);
  }
  return {tm, tp};
}

double exp_abs_gauss(double a, double b) {
  const auto [tm, tp] = exp_abs_gauss_terms(a, b);
  return tm + tp;
}

double weighted_exp_abs_gauss(double a, double b) {
  const auto [tm, tp] = exp_abs_gauss_terms(a, b);
  const double r = b / a;
  return b * (tm - tp) - a * a * (tm + tp) +
         a * kSqrt2OverPi * std::exp(-0.5 * r * r);
}

}  // namespace sk
