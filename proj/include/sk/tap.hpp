#pragma once

#include "sk/disorder.hpp"
#include "sk/functionals.hpp"
#include "sk/rs_scalars.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sk {

/// Trace of the two-step-memory iteration m^(k+1) = tanh(h + beta J m^(k)/sqrt(N)
/// - beta^2 (1-q) m^(k-1)), with all diagnostics filled during the run.
struct IterateTrace {
  std::vector<Eigen::VectorXd> iterates;  // m^(0) .. m^(K)
  Eigen::VectorXd norms_sq;               // ||m^(k)||^2_{2,N} (= q_EA)
  Eigen::MatrixXd overlaps;               // <m^(k), m^(j)>, (K+1)x(K+1)
  Eigen::VectorXd grad_norms;             // ||grad Psi(m^(k))||_{2,N}
  Eigen::VectorXd fht_values;
  Eigen::VectorXd ftap_values;
  Eigen::VectorXd increments;             // ||m^(k) - m^(k-1)||^2_{2,N}, k >= 1
};

/// Runs the iteration for K steps (h > 0, K >= 2). m^(0)=0, m^(1)=sqrt(q) 1.
IterateTrace iterate_tap(const DisorderSample& d, const ModelParams& p, double q, int K);

/// ||m^(k+1) - m^(k)||^2_{2,N} for k = 0..K-1 (entry 0 equals q exactly).
std::vector<double> cauchy_increments(const IterateTrace& t);

/// F^HT(m^(k)) per k, recomputed from the stored iterates.
std::vector<double> fht_at_iterates(const IterateTrace& t, const DisorderSample& d,
                                    const ModelParams& p, double q);

struct OverlapReport {
  Eigen::MatrixXd deviation;  // |<m^(k), m^(j)> - rho_j| for 1 <= j < k, else 0
  double max_deviation = 0.0;
  double mean_deviation = 0.0;
};

/// Deviations of the empirical overlaps from the scalar sequence rho_j.
OverlapReport overlap_diagnostics(const IterateTrace& t, const GammaRhoSeq& seq);

/// Mean deviations under the two gamma_1 conventions; true when the scaled
/// convention fits better.
struct Gamma1Adjudication {
  double mean_dev_scaled;
  double mean_dev_literal;
  bool scaled_wins;
};
Gamma1Adjudication adjudicate_gamma1(const IterateTrace& t, const GammaRhoSeq& scaled,
                                     const GammaRhoSeq& literal);

/// State of the conditioned construction: orthonormal directions phi^(s),
/// conditioned fields/magnetizations, the Gaussian vectors zeta^(s) and the
/// current deflated matrix g^(k).
struct ConditionedState {
  std::vector<Eigen::VectorXd> phis;    // phi^(1..K)
  std::vector<Eigen::VectorXd> zetas;   // zeta^(1..K-1)
  std::vector<Eigen::VectorXd> hbars;   // hbar^(1..K)
  std::vector<Eigen::VectorXd> mbars;   // mbar^(1..K)
  Eigen::MatrixXd g_current;            // g^(K)
};

/// Explicit construction via rank-one deflations of the raw g matrix
/// (K <= 30). Throws std::runtime_error when the Gram-Schmidt residual
/// norm falls below 1e-10 (linear dependence).
ConditionedState conditioned_iterate(const DisorderSample& d, const ModelParams& p,
                                     double q, const GammaRhoSeq& seq, int K);

/// One CSV row per k: k, norm_sq, grad_norm, fht, ftap, q_ea, increment.
std::string trace_csv(const IterateTrace& t);

}  // namespace sk
