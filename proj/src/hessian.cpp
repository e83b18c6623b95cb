#include "sk/hessian.hpp"

#include "sk/eigs.hpp"
#include "sk/rng.hpp"
#include "sk/tap.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace sk {

namespace {

void require_interior(const Eigen::VectorXd& m, const char* who) {
  if ((m.array().abs() >= 1.0).any())
    throw std::domain_error(std::string(who) + ": magnetization on the cube boundary");
}

double norm_of(const Eigen::MatrixXd& m) {
  if (m.size() == 0 || m.isZero(0.0)) return 0.0;
  return spectral_radius(m, 1e-8);
}

}  // namespace

Eigen::VectorXd a_coeffs(const Eigen::VectorXd& m, const ModelParams& p, double q) {
  require_interior(m, "a_coeffs");
  const double shift = p.beta * p.beta * (1.0 - q);
  return (shift + (1.0 - m.array().square()).inverse()).inverse().matrix();
}

Eigen::MatrixXd hessian(const Eigen::VectorXd& m, const DisorderSample& d,
                        const ModelParams& p, double q) {
  require_interior(m, "hessian");
  const double shift = p.beta * p.beta * (1.0 - q);
  Eigen::MatrixXd h = p.beta * d.j_over_sqrt_n;
  h.diagonal() -= (shift + (1.0 - m.array().square()).inverse()).matrix();
  return h;
}

Eigen::MatrixXd c_matrix(const Eigen::VectorXd& m, const DisorderSample& d,
                         const ModelParams& p, double q) {
  const Eigen::VectorXd s = a_coeffs(m, p, q).cwiseSqrt();
  return s.asDiagonal() * d.j_over_sqrt_n * s.asDiagonal();
}

double c0(double y, const ModelParams& p, double q) {
  if (!(y > 0.0 && y <= 1.0)) throw std::domain_error("c0: y must be in (0,1]");
  return 1.0 / (p.beta * p.beta * (1.0 - q) + 1.0 / y);
}

CDecomposition decompose_c(const Eigen::VectorXd& m, const DisorderSample& d,
                           const ModelParams& p, double q, double theta,
                           double theta_star) {
  if (!(0.0 < theta_star && theta_star < theta && theta <= 1.0))
    throw std::invalid_argument("decompose_c: need 0 < theta_star < theta <= 1");
  const int n = d.n;
  const Eigen::VectorXd a = a_coeffs(m, p, q);
  const double cap = c0(theta_star, p, q);

  CDecomposition dec;
  Eigen::VectorXd a_tilde(n);
  for (int i = 0; i < n; ++i) {
    const double gap = 1.0 - m[i] * m[i];
    if (gap > theta) dec.lambda.push_back(i);
    if (gap > theta_star) {
      dec.lambda_star.push_back(i);
      a_tilde[i] = a[i];
    } else {
      a_tilde[i] = cap;
    }
  }

  const Eigen::VectorXd s = a.cwiseSqrt();
  const Eigen::VectorXd s_tilde = a_tilde.cwiseSqrt();
  const Eigen::MatrixXd c = s.asDiagonal() * d.j_over_sqrt_n * s.asDiagonal();
  const Eigen::MatrixXd c_tilde =
      s_tilde.asDiagonal() * d.j_over_sqrt_n * s_tilde.asDiagonal();

  dec.over = Eigen::MatrixXd::Zero(n, n);
  for (int i : dec.lambda)
    for (int j : dec.lambda) dec.over(i, j) = c_tilde(i, j);
  dec.circ = c_tilde - dec.over;
  dec.under = c - c_tilde;
  return dec;
}

double sigma_profile(const Eigen::VectorXd& m, const ModelParams& p, double q) {
  const Eigen::VectorXd a = a_coeffs(m, p, q);
  return std::sqrt(a.maxCoeff() * a.mean());
}

double sigma_star_profile(const Eigen::VectorXd& m, const ModelParams& p, double q) {
  const Eigen::VectorXd a = a_coeffs(m, p, q);
  return a.maxCoeff() / std::sqrt(static_cast<double>(m.size()));
}

namespace {

double bvh_formula(double sigma, double sigma_star, double eps, int n) {
  return (1.0 + eps) *
         (2.0 * sigma + (6.0 / std::sqrt(std::log1p(eps))) * sigma_star *
                            std::sqrt(std::log(static_cast<double>(n))));
}

}  // namespace

double bvh_bound(const Eigen::VectorXd& m, const ModelParams& p, double q, double eps) {
  if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("bvh_bound: eps in (0, 0.5]");
  return bvh_formula(sigma_profile(m, p, q), sigma_star_profile(m, p, q), eps,
                     static_cast<int>(m.size()));
}

double bvh_bound_tamed(const Eigen::VectorXd& m, const ModelParams& p, double q,
                       double theta, double theta_star, double eps) {
  if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("bvh_bound_tamed: eps in (0, 0.5]");
  const int n = static_cast<int>(m.size());
  const Eigen::VectorXd a = a_coeffs(m, p, q);
  const double cap = c0(theta_star, p, q);
  double mean_tilde = 0.0;
  for (int i = 0; i < n; ++i)
    mean_tilde += (1.0 - m[i] * m[i] > theta_star) ? a[i] : cap;
  mean_tilde /= n;
  const double sigma_t = std::sqrt(c0(1.0, p, q) * mean_tilde);
  const double sigma_star_t = std::sqrt(c0(1.0, p, q) * c0(theta, p, q) / n);
  return bvh_formula(sigma_t, sigma_star_t, eps, n);
}

double shell_bound_r(double rho, double eps, double eps_tilde, double theta,
                     double theta_star, const ModelParams& p, double q, int n) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("shell_bound_r: rho in (0,1)");
  const double band = rho * (1.0 - rho) * eps;
  const double rho_minus = rho - (band + rho * eps_tilde);
  const double rho_plus2 = rho + (band + 2.0 * rho * eps_tilde);
  const double c01 = c0(1.0, p, q);
  const double cts = c0(theta_star, p, q);
  const double term1 = 2.0 * std::sqrt(c0(std::clamp(1.0 - rho_minus, 1e-300, 1.0), p, q) + cts);
  const double term2 = std::sqrt(2.0 * c0(theta, p, q) *
                                 std::log(2.0 * M_PI * M_E * rho_plus2 / (rho * eps_tilde)));
  const double term3 = 12.0 * std::pow(cts / theta_star, 1.5) *
                       std::sqrt(rho * eps_tilde * (1.0 - theta_star) / theta_star);
  const double term4 =
      15.0 * std::sqrt(std::log(static_cast<double>(n)) / (c01 * std::sqrt(static_cast<double>(n))));
  return term1 + term2 + term3 + term4;
}

Eigen::VectorXd sample_cube_point(int n, std::uint64_t seed, std::uint64_t index) {
  Eigen::VectorXd m(n);
  for (int i = 0; i < n; ++i) {
    const double u = uniform_half_open(mix64(seed, index * static_cast<std::uint64_t>(n) + i));
    m[i] = std::clamp(2.0 * u - 1.0, -1.0 + 1e-9, 1.0 - 1e-9);
  }
  return m;
}

Eigen::VectorXd sample_shell_rejection(int n, double rho, std::uint64_t seed,
                                       std::uint64_t index) {
  const double radius = std::sqrt(rho * n);
  std::uint64_t k = index * 100000ull * n;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = normal_at(seed, k++);
    const Eigen::VectorXd m = (radius / z.norm()) * z;
    if ((m.array().abs() < 1.0 - 1e-9).all()) return m;
  }
  throw std::invalid_argument(
      "sample_shell_rejection: cube rejection cap exhausted (shell unreachable by "
      "direction-radius sampling at this rho and n)");
}

Eigen::VectorXd sample_shell_smooth(int n, double rho, std::uint64_t seed,
                                    std::uint64_t index) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::domain_error("sample_shell_smooth: rho in (0,1)");
  const std::uint64_t base = index * static_cast<std::uint64_t>(n);
  if (rho <= 0.9) {
    // radial tanh profile, argument capped before tanh rounds to 1.0
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = normal_at(seed, base + i);
    auto profile = [&](double c) {
      return (c * z.array()).min(18.0).max(-18.0).tanh();
    };
    auto qea_at = [&](double c) { return profile(c).square().mean(); };
    double lo = 0.0, hi = 1.0;
    while (qea_at(hi) < rho && hi < 64.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (qea_at(mid) < rho) lo = mid; else hi = mid;
    }
    return profile(0.5 * (lo + hi)).matrix();
  }
  // complement profile: m_i = s_i sqrt(1 - u_i) with exponential weights
  // normalized so that mean(u) = 1 - rho exactly
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i)
    w[i] = -std::log(uniform_pos(mix64(seed ^ 0xC0FFEEull, base + i)));
  w *= (1.0 - rho) * n / w.sum();
  Eigen::VectorXd m(n);
  for (int i = 0; i < n; ++i) {
    const double u = std::clamp(w[i], 4e-16, 1.0 - 1e-15);
    const double sign =
        (mix64(seed ^ 0xFACEull, base + i) & 1ull) ? 1.0 : -1.0;
    m[i] = sign * std::sqrt(1.0 - u);
  }
  return m;
}

std::vector<SpectralReport> negativity_scan(const DisorderSample& d, const ModelParams& p,
                                            double q, ScanSet set, double rho, double eps,
                                            int n_points, std::uint64_t rng_seed) {
  const int n = d.n;
  std::vector<Eigen::VectorXd> points;
  points.reserve(n_points + 1);
  for (int i = 0; i < n_points; ++i) {
    switch (set) {
      case ScanSet::Cube: points.push_back(sample_cube_point(n, rng_seed, i)); break;
      case ScanSet::ShellRejection:
        points.push_back(sample_shell_rejection(n, rho, rng_seed, i));
        break;
      case ScanSet::ShellSmooth:
        points.push_back(sample_shell_smooth(n, rho, rng_seed, i));
        break;
    }
  }
  points.push_back(iterate_tap(d, p, q, 12).iterates.back());

  const double f2 = f1_f2(p, q, 0.0).second;
  const double f2_bound = f2 + p.beta * std::pow(static_cast<double>(n), -0.25);
  const double r_j = spectral_radius(d.j_over_sqrt_n, 1e-8);

  std::vector<SpectralReport> reports;
  reports.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::VectorXd& m = points[i];
    SpectralReport rep;
    rep.point_id = static_cast<int>(i);
    rep.q_ea_point = m.squaredNorm() / n;

    const Eigen::VectorXd a = a_coeffs(m, p, q);
    const Eigen::VectorXd b = a.cwiseInverse();
    auto apply_h = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      y.noalias() = p.beta * (d.j_over_sqrt_n * x);
      y -= b.cwiseProduct(x);
    };
    const Eigen::VectorXd s = a.cwiseSqrt();
    auto apply_c = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      y.noalias() = d.j_over_sqrt_n * s.cwiseProduct(x);
      y = s.cwiseProduct(y);
    };
    rep.lambda_max_h = (n <= 200)
        ? extreme_eigenvalues(hessian(m, d, p, q), 1e-8).lambda_max
        : extreme_eigenvalues(apply_h, n, 1e-8).lambda_max;
    rep.lambda_max_c = (n <= 200)
        ? extreme_eigenvalues(c_matrix(m, d, p, q), 1e-8).lambda_max
        : extreme_eigenvalues(apply_c, n, 1e-8).lambda_max;

    // decomposition terms at the standard threshold choices for this shell
    const double rr = std::clamp(rep.q_ea_point, 1e-6, 1.0 - 1e-6);
    const double rho_minus = rr - rr * (1.0 - rr) * eps;
    const double theta = std::sqrt(1.0 - rho_minus);
    const double theta_star = (1.0 - rho_minus) * (1.0 - rho_minus);
    if (theta_star < theta) {
      const CDecomposition dec = decompose_c(m, d, p, q, theta, theta_star);
      if (!dec.lambda.empty()) {
        Eigen::MatrixXd j_lambda = Eigen::MatrixXd::Zero(n, n);
        for (int r : dec.lambda)
          for (int c : dec.lambda) j_lambda(r, c) = d.j_over_sqrt_n(r, c);
        rep.term_over = c0(1.0, p, q) * norm_of(j_lambda);
      }
      rep.term_circ = norm_of(dec.circ);
      rep.term_under =
          3.0 * std::sqrt(c0(1.0, p, q) * c0(theta_star, p, q)) * r_j;
    }

    rep.f2_bound = f2_bound;
    rep.bvh_mean_bound = bvh_bound(m, p, q, std::min(std::max(eps, 1e-3), 0.5));
    rep.hessian_negative = rep.lambda_max_h < 0.0;
    rep.sign_equivalent = (rep.lambda_max_h < 0.0) == (p.beta * rep.lambda_max_c < 1.0);
    reports.push_back(rep);
  }
  return reports;
}

std::string scan_csv(const std::vector<SpectralReport>& reports,
                     const std::string& region_flags) {
  std::ostringstream out;
  out.precision(17);
  out << "point_id,q_ea,lambda_max_h,lambda_max_c,f2_bound,bvh_bound,region_flags\n";
  for (const auto& r : reports) {
    out << r.point_id << ',' << r.q_ea_point << ',' << r.lambda_max_h << ','
        << r.lambda_max_c << ',' << r.f2_bound << ',' << r.bvh_mean_bound << ','
        << region_flags << '\n';
  }
  return out.str();
}

}  // namespace sk
