#include "sk/functionals.hpp"

#include <stdexcept>

namespace sk {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kBoundaryGuard = 1.0 - 1e-12;

void require_closed_cube(const Eigen::VectorXd& m, const char* who) {
  if ((m.array().abs() > 1.0).any())
    throw std::domain_error(std::string(who) + ": component outside [-1,1]");
}

}  // namespace

double cramer_entropy(double x) {
  if (std::abs(x) > 1.0) throw std::domain_error("cramer_entropy: |x| > 1");
  const double up = 0.5 * (1.0 + x);
  const double dn = 0.5 * (1.0 - x);
  const double a = up > 0.0 ? up * std::log(up) : 0.0;
  const double b = dn > 0.0 ? dn * std::log(dn) : 0.0;
  return a + b;
}

double cramer_conjugate(double x) { return log_cosh(x) + kLog2; }

double q_ea(const Eigen::VectorXd& m) { return m.squaredNorm() / m.size(); }

double psi_fn(const Eigen::VectorXd& m, const DisorderSample& d,
              const ModelParams& p, const Eigen::VectorXd& hvec) {
  require_closed_cube(m, "psi_fn");
  const Eigen::VectorXd am = d.a_matrix * m;
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) entropy += cramer_entropy(m[i]);
  return 0.5 * p.beta * m.dot(am) + hvec.dot(m) - entropy;
}

double phi_fn(const Eigen::VectorXd& m, const DisorderSample& d,
              const ModelParams& p, const Eigen::VectorXd& hvec) {
  const Eigen::VectorXd am = d.a_matrix * m;
  double conj = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    conj += cramer_conjugate(p.beta * am[i] + hvec[i]);
  return -0.5 * p.beta * m.dot(am) + conj;
}

Eigen::VectorXd grad_psi(const Eigen::VectorXd& m, const DisorderSample& d,
                         const ModelParams& p, const Eigen::VectorXd& hvec) {
  if ((m.array().abs() >= kBoundaryGuard).any())
    throw std::domain_error("grad_psi: component at the boundary, atanh singular");
  Eigen::VectorXd g = p.beta * (d.a_matrix * m) + hvec;
  for (Eigen::Index i = 0; i < m.size(); ++i) g[i] -= std::atanh(m[i]);
  return g;
}

double f_tap(const Eigen::VectorXd& m, const DisorderSample& d,
             const ModelParams& p, double q) {
  require_closed_cube(m, "f_tap");
  (void)q;
  const int n = d.n;
  const double quad = 0.5 * p.beta * m.dot(d.j_over_sqrt_n * m);
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) entropy += cramer_entropy(m[i]);
  const double one_minus_qea = 1.0 - q_ea(m);
  return (quad + p.h * m.sum() +
          0.25 * n * p.beta * p.beta * one_minus_qea * one_minus_qea - entropy) / n;
}

double f_ht(const Eigen::VectorXd& m, const DisorderSample& d,
            const ModelParams& p, double q) {
  const double gap = q - q_ea(m);
  return f_tap(m, d, p, q) - 0.25 * p.beta * p.beta * gap * gap;
}

Eigen::VectorXd modified_field(const Eigen::VectorXd& mbar, const DisorderSample& d,
                               const ModelParams& p, const Eigen::VectorXd& hvec) {
  return hvec - grad_psi(mbar, d, p, hvec);
}

std::pair<double, bool> plefka_condition(const Eigen::VectorXd& m, const ModelParams& p) {
  require_closed_cube(m, "plefka_condition");
  const double s = (1.0 - m.array().square()).square().sum() / m.size();
  const double v = p.beta * p.beta * s;
  return {v, v < 1.0};
}

Eigen::VectorXd uniform_field(int n, double h) {
  return Eigen::VectorXd::Constant(n, h);
}

}  // namespace sk
