#pragma once

#include "sk/disorder.hpp"
#include "sk/rs_scalars.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace sk {

/// Hessian of Psi at m: beta J/sqrt(N) - diag(b_i),
/// b_i = beta^2 (1-q) + 1/(1-m_i^2).  Requires |m_i| < 1.
Eigen::MatrixXd hessian(const Eigen::VectorXd& m, const DisorderSample& d,
                        const ModelParams& p, double q);

/// Similarity-transformed matrix C_ij = (J/sqrt(N))_ij sqrt(a_i a_j),
/// a_i = 1/b_i.
Eigen::MatrixXd c_matrix(const Eigen::VectorXd& m, const DisorderSample& d,
                         const ModelParams& p, double q);

/// c0(y) = (beta^2 (1-q) + 1/y)^{-1}, y in (0, 1].
double c0(double y, const ModelParams& p, double q);

/// Coefficients a_i(m) = 1 / (beta^2(1-q) + 1/(1-m_i^2)).
Eigen::VectorXd a_coeffs(const Eigen::VectorXd& m, const ModelParams& p, double q);

/// Threshold decomposition C = C_under + C_circ + C_over with index sets
/// Lambda = {1-m_i^2 > theta}, Lambda_star = {1-m_i^2 > theta_star} and the
/// capped coefficients a~.  Requires 0 < theta_star < theta <= 1.
struct CDecomposition {
  Eigen::MatrixXd under;  // C - C~
  Eigen::MatrixXd circ;   // C~ - C_bar
  Eigen::MatrixXd over;   // C~ restricted to Lambda x Lambda
  std::vector<int> lambda;
  std::vector<int> lambda_star;
};
CDecomposition decompose_c(const Eigen::VectorXd& m, const DisorderSample& d,
                           const ModelParams& p, double q, double theta,
                           double theta_star);

/// Variance-profile quantities sigma(m) = max_i sqrt(sum_j v_ij^2),
/// sigma_star(m) = max_ij |v_ij| for the full profile v_ij = sqrt(a_i a_j / N).
double sigma_profile(const Eigen::VectorXd& m, const ModelParams& p, double q);
double sigma_star_profile(const Eigen::VectorXd& m, const ModelParams& p, double q);

/// Mean operator-norm bound (1+eps){2 sigma + (6/sqrt(log(1+eps))) sigma_star
/// sqrt(log N)} for the full profile.
double bvh_bound(const Eigen::VectorXd& m, const ModelParams& p, double q, double eps);

/// Same bound for the tamed C-circ profile, using sigma~ and sigma~_star.
double bvh_bound_tamed(const Eigen::VectorXd& m, const ModelParams& p, double q,
                       double theta, double theta_star, double eps);

/// The four-term shell bound r(rho, eps, eps~, theta, theta_star, beta).
double shell_bound_r(double rho, double eps, double eps_tilde, double theta,
                     double theta_star, const ModelParams& p, double q, int n);

struct SpectralReport {
  int point_id = 0;
  double q_ea_point = 0.0;
  double lambda_max_h = 0.0;
  double lambda_max_c = 0.0;
  double term_over = 0.0;   // c0(1) ||J_Lambda / sqrt(N)||
  double term_circ = 0.0;   // ||C_circ||
  double term_under = 0.0;  // 3 sqrt(c0(1) c0(theta_star)) ||J / sqrt(N)||
  double f2_bound = 0.0;    // f2(beta,q) + beta N^{-1/4}
  double bvh_mean_bound = 0.0;
  bool sign_equivalent = false;  // lambda_max(H) < 0 iff beta lambda_max(C) < 1
  bool hessian_negative = false;
};

enum class ScanSet { Cube, ShellRejection, ShellSmooth };

/// Magnetization samplers.  Cube: i.i.d. uniform coordinates.  Shell
/// rejection: uniform direction scaled to q_EA = rho, rejecting points
/// outside the cube (cap 1e5, then error) — infeasible for large rho at
/// large n.  Shell smooth: always inside the cube with q_EA = rho exactly;
/// a tanh radial profile at moderate rho, a randomized complement profile
/// m_i = +-sqrt(1 - u_i) near the corners.
Eigen::VectorXd sample_cube_point(int n, std::uint64_t seed, std::uint64_t index);
Eigen::VectorXd sample_shell_rejection(int n, double rho, std::uint64_t seed,
                                       std::uint64_t index);
Eigen::VectorXd sample_shell_smooth(int n, double rho, std::uint64_t seed,
                                    std::uint64_t index);

/// Evaluates spectra and bound terms at n_points sampled magnetizations plus
/// the TAP iterate m^(12).  rho/eps select the shell (ignored in Cube mode).
std::vector<SpectralReport> negativity_scan(const DisorderSample& d, const ModelParams& p,
                                            double q, ScanSet set, double rho, double eps,
                                            int n_points, std::uint64_t rng_seed);

/// CSV export: point_id, q_ea, lambda_max_h, lambda_max_c, f2_bound,
/// bvh_bound, region_flags.
std::string scan_csv(const std::vector<SpectralReport>& reports,
                     const std::string& region_flags);

}  // namespace sk
