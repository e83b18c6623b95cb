#pragma once

#include "sk/disorder.hpp"
#include "sk/rs_scalars.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace sk {

/// (1/N) log of the exact partition sum over {-1,1}^N, diagonal couplings
/// included.  Gray-code walk with incremental local fields and a streaming
/// log-sum-exp; the walk is split into fixed segments so the result does not
/// depend on the thread count.  Requires n <= 22.
double brute_force_z(const DisorderSample& d, const ModelParams& p, int threads = 1);

struct MaximizeResult {
  Eigen::VectorXd argmax;
  double value = 0.0;           // F^HT at the argmax
  double grad_norm = 0.0;       // ||grad Psi||_{2,N} at the argmax
  int converged_starts = 0;
  double value_spread = 0.0;    // max - min over converged start values
};

/// Multi-start maximization of F^HT over the cube: damped fixed-point
/// iteration of the critical-point map with a Newton polish, 16
/// shell-stratified starts plus the TAP iterate.  Requires n <= 200.
MaximizeResult maximize_fht(const DisorderSample& d, const ModelParams& p, double q,
                            int restarts = 16, std::uint64_t start_seed = 7);

struct HsResult {
  std::complex<double> value;   // the integral representation of Z
  double refine_rel_diff = 0.0; // relative change under order doubling
};

/// Integral representation of Z via the auxiliary-field transformation:
/// tensor quadrature over R^n against the Gaussian factor, complex square
/// root of the shifted coupling matrix.  Requires n <= 3.  Throws
/// std::runtime_error when order doubling moves the value by more than
/// refine_tol relative.
HsResult hs_integral(const DisorderSample& d, const ModelParams& p, double q,
                     int order = 120, double refine_tol = 1e-6);

struct ShiftedHsResult {
  std::complex<double> value;      // contour-shifted integral (equals the unshifted one)
  std::complex<double> remainder;  // R_{N,beta,h}(z)
  double phi_z = 0.0;              // Phi(z) evaluated along the shift
};

/// Contour shift through x* = sqrt(beta) sqrt(A) z and the remainder split
/// (1/N) log Z = (1/N) Phi(z) + beta^2 (1-q)/2 + R(z).
ShiftedHsResult shifted_hs_integral(const DisorderSample& d, const ModelParams& p,
                                    double q, const Eigen::VectorXd& z, int order = 120);

struct GapRow {
  int n = 0;
  std::uint64_t seed = 0;
  double log_z_per_spin = 0.0;
  double sup_fht = 0.0;
  double gap = 0.0;
  double q_ea_argmax = 0.0;
};

struct GapStudy {
  std::vector<GapRow> rows;          // ordered by (n, seed)
  std::vector<double> mean_gap;      // per size
  std::vector<double> stddev_gap;    // per size, sample std
  std::vector<int> sizes;
};

GapStudy gap_study(const ModelParams& p, const std::vector<int>& sizes,
                   int seeds_per_size, std::uint64_t base_seed = 1000,
                   int restarts = 16, int threads = 1);

/// CSV: n, seed, log_z_per_spin, sup_fht, gap, q_ea_argmax.
std::string gap_csv(const GapStudy& g);

}  // namespace sk
