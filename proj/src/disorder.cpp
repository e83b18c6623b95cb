#include "sk/disorder.hpp"

#include "sk/eigs.hpp"
#include "sk/rng.hpp"

#include <fstream>
#include <stdexcept>

namespace sk {

DisorderSample sample_disorder(int n, std::uint64_t seed, const ModelParams& p, double q) {
  if (n < 1) throw std::invalid_argument("sample_disorder: n must be >= 1");
  p.validate();
  DisorderSample d;
  d.n = n;
  d.seed = seed;
  d.beta = p.beta;
  d.q = q;
  d.g.resize(n, n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d.g(i, j) = normal_at(seed, static_cast<std::uint64_t>(i) * n + j) * inv_sqrt_n;
  d.j_over_sqrt_n = (d.g + d.g.transpose()) / std::sqrt(2.0);
  d.a_matrix = d.j_over_sqrt_n;
  d.a_matrix.diagonal().array() -= p.beta * (1.0 - q);
  return d;
}

double spectral_radius(const Eigen::MatrixXd& m, double tol) {
  const EigenExtremes e = extreme_eigenvalues(m, tol);
  return std::max(std::abs(e.lambda_min), std::abs(e.lambda_max));
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("write_matrix: square matrices only");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_matrix: cannot open " + path);
  const std::uint64_t n = static_cast<std::uint64_t>(m.rows());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j) {
      const double v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  if (!out) throw std::runtime_error("write_matrix: short write to " + path);
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_matrix: cannot open " + path);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  if (!in) throw std::runtime_error("read_matrix: truncated file " + path);
  return m;
}

}  // namespace sk
