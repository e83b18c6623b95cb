#pragma once

#include "sk/gauss.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>

namespace sk {

/// Inverse temperature and external field of the model.
struct ModelParams {
  double beta;
  double h;

  void validate() const;                 // beta > 0, h >= 0
  void require_positive_field() const;   // h > 0
};

/// Output of the scalar fixed-point solve: overlap q, the replica-symmetric
/// free energy, the stability value and the achieved fixed-point residual.
struct RsSolution {
  double q;
  double sk;
  double at_value;
  double residual;
};

/// Solves q = E tanh^2(beta sqrt(q) Z + h).  h=0, beta<=1 returns q=0 exactly;
/// h=0, beta>1 returns the positive branch.  Damped fixed-point iteration with
/// a bisection fallback; throws std::runtime_error if the residual target is
/// not reached within the iteration cap.
RsSolution solve_q(const ModelParams& p, const QuadContext& ctx = default_quad());

/// log 2 + (beta^2/4)(1-q)^2 + E log cosh(beta sqrt(q) Z + h).
double sk_formula(const ModelParams& p, double q, const QuadContext& ctx = default_quad());

/// (beta^2 E cosh^-4(beta sqrt(q) Z + h), value <= 1).
std::pair<double, bool> at_condition(const ModelParams& p, const QuadContext& ctx = default_quad());

/// psi(t) = E[(E' Th(sqrt(t) Z + sqrt(q-t) Z'))^2], Th(x) = tanh(h + beta x),
/// for t in [0, q].
double psi_map(double t, const ModelParams& p, double q, const QuadContext& ctx = default_quad());

struct GammaRhoSeq {
  Eigen::VectorXd gammas;            // gamma_1..gamma_K
  Eigen::VectorXd rhos;              // rho_1..rho_K
  Eigen::VectorXd gamma_sq_partial;  // Gamma^2_k = sum_{j<=k} gamma_j^2
  // The recursion contracts geometrically, so q - rho_k and q - Gamma^2_k
  // cross the double-precision floor of the absolute values within ~12 steps;
  // the gaps are tracked in their own scale and stay meaningful for any K.
  Eigen::VectorXd rho_gaps;          // q - rho_k
  Eigen::VectorXd gamma_sq_gaps;     // q - Gamma^2_k
};

/// gamma_1 choices: Scaled is E tanh(h + beta sqrt(q) Z), Literal is
/// E tanh(h + beta Z) exactly as printed.
enum class Gamma1Convention { Scaled, Literal };

/// The scalar recursion rho_k = psi(rho_{k-1}),
/// gamma_k = (rho_k - Gamma^2_{k-1}) / sqrt(q - Gamma^2_{k-1}).
/// Requires h > 0 and K <= 200; throws std::runtime_error if q - Gamma^2
/// becomes nonpositive (sequence leaves the admissible range).
GammaRhoSeq gamma_rho_sequence(const ModelParams& p, int K,
                               Gamma1Convention conv = Gamma1Convention::Scaled,
                               const QuadContext& ctx = default_quad());

/// theta(rho) = 36(1-rho) + 4(1-rho)^{1/2}
///            + (1-rho)^{1/4} [4 + sqrt(12(|ln(1-rho)| + 2))], theta(1) = 0.
double theta_fn(double rho);

/// r(beta,h) = (beta^2 q (1-q) + E 2|beta sqrt(q) Z + h| e^{-2|...|}) / h.
double r_field(const ModelParams& p, double q);

/// Two-branch threshold rho_bar(beta,h) < q; requires h > 1.
double rho_bar(const ModelParams& p, double q);

struct RegionReport {
  bool in_d1 = false;
  bool in_d2 = false;        // D^(2) at rho = rho_bar
  bool in_d3 = false;
  bool in_d4 = false;
  bool in_d_tilde2 = false;
  bool in_at = false;
  bool in_d = false;
  double q = 0.0;
  double rho_bar = 0.0;           // NaN when undefined (outside D^(3) or h<=1)
  double theta_of_rho_bar = 0.0;  // NaN when rho_bar undefined
  double r_bh = 0.0;
  double at_value = 0.0;
  std::string notes;              // why a membership failed its prerequisites
};

/// Evaluates every region membership at (beta, h) with q from solve_q.
RegionReport classify_region(const ModelParams& p, const QuadContext& ctx = default_quad());

/// Delta_{beta,h}(rho) = E[log cosh(sqrt(rho/q)(beta sqrt(q) Z + h))
///                        - log cosh(beta sqrt(q) Z + h)].
double delta_bh(double rho, const ModelParams& p, double q,
                const QuadContext& ctx = default_quad());

/// psi_{beta,h}(rho) = sqrt(rho) h (1 - sqrt(rho/q))
///                   + (beta^2/2)(1-q)(q-rho) + Delta_{beta,h}(rho).
double psi_rho(double rho, const ModelParams& p, double q,
               const QuadContext& ctx = default_quad());

/// sup over [0, rho_max) by a 2000-point grid plus golden-section refinement
/// (tolerance 1e-8 in rho).
double sup_psi_rho(const ModelParams& p, double q, double rho_max,
                   const QuadContext& ctx = default_quad());

/// Sandwich on 1-q: the always-valid bound intersected with the large-field
/// refinements when their hypotheses hold (eta = 1/20).
std::pair<double, double> one_minus_q_bounds(const ModelParams& p, double q);

/// (f1(rho), f2(beta,q)) = (theta(rho), 2 beta - (beta^2 (1-q) + 1)).
std::pair<double, double> f1_f2(const ModelParams& p, double q, double rho);

/// log cosh with no overflow: |x| + log1p(e^{-2|x|}) - log 2.
double log_cosh(double x);

}  // namespace sk
