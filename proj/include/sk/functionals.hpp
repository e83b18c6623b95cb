#pragma once

#include "sk/disorder.hpp"
#include "sk/rs_scalars.hpp"

#include <Eigen/Dense>

#include <utility>

namespace sk {

/// Cramer entropy I(x) on [-1,1], with 0 log 0 = 0 at the endpoints.
double cramer_entropy(double x);

/// Fenchel conjugate I*(x) = log cosh(x) + log 2.
double cramer_conjugate(double x);

/// Edwards-Anderson parameter (1/N) sum m_i^2.
double q_ea(const Eigen::VectorXd& m);

/// Psi(m) = (beta/2)(m, A m) + (hvec, m) - sum I(m_i).  Unnormalized.
/// Requires |m_i| <= 1.
double psi_fn(const Eigen::VectorXd& m, const DisorderSample& d,
              const ModelParams& p, const Eigen::VectorXd& hvec);

/// Phi(m) = -(beta/2)(m, A m) + sum I*(beta (A m)_i + hvec_i).  Unnormalized.
double phi_fn(const Eigen::VectorXd& m, const DisorderSample& d,
              const ModelParams& p, const Eigen::VectorXd& hvec);

/// Gradient of Psi: component i is beta (A m)_i + hvec_i - atanh(m_i).
/// Requires |m_i| < 1 strictly (1 - 1e-12 guard).
Eigen::VectorXd grad_psi(const Eigen::VectorXd& m, const DisorderSample& d,
                         const ModelParams& p, const Eigen::VectorXd& hvec);

/// Per-spin functionals.
double f_tap(const Eigen::VectorXd& m, const DisorderSample& d,
             const ModelParams& p, double q);
double f_ht(const Eigen::VectorXd& m, const DisorderSample& d,
            const ModelParams& p, double q);

/// Field such that Psi with it has a critical point at mbar:
/// hbar = hvec - grad Psi(mbar).
Eigen::VectorXd modified_field(const Eigen::VectorXd& mbar, const DisorderSample& d,
                               const ModelParams& p, const Eigen::VectorXd& hvec);

/// (beta^2 (1/N) sum (1 - m_i^2)^2, value < 1).
std::pair<double, bool> plefka_condition(const Eigen::VectorXd& m, const ModelParams& p);

/// Uniform field h * ones(n).
Eigen::VectorXd uniform_field(int n, double h);

}  // namespace sk
