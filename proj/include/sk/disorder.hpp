#pragma once

#include "sk/rs_scalars.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace sk {

/// One seeded coupling realization.  g holds the raw i.i.d. N(0, 1/N) matrix
/// (entry (i,j) drawn at counter i*n+j, row-major); j_over_sqrt_n is the
/// symmetrized (g + g^T)/sqrt(2) and a_matrix subtracts beta(1-q) on the
/// diagonal.
struct DisorderSample {
  int n = 0;
  std::uint64_t seed = 0;
  double beta = 0.0;
  double q = 0.0;
  Eigen::MatrixXd g;
  Eigen::MatrixXd j_over_sqrt_n;
  Eigen::MatrixXd a_matrix;
};

DisorderSample sample_disorder(int n, std::uint64_t seed, const ModelParams& p, double q);

/// max(|lambda_max|, |lambda_min|) of a symmetric matrix to relative
/// tolerance tol.
double spectral_radius(const Eigen::MatrixXd& m, double tol = 1e-10);

/// Dense binary dump: u64 LE header (n), then n^2 LE doubles, row-major.
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::string& path);

}  // namespace sk
