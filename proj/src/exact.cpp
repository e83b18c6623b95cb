#include "sk/exact.hpp"

#include "sk/functionals.hpp"
#include "sk/hessian.hpp"
#include "sk/tap.hpp"

#include <Eigen/Eigenvalues>

#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sk {

namespace {

struct LogSum {
  double max_exp = -std::numeric_limits<double>::infinity();
  double scaled = 0.0;  // sum of e^{x - max_exp}

  void add(double x) {
    if (x <= max_exp) {
      scaled += std::exp(x - max_exp);
    } else {
      scaled = scaled * std::exp(max_exp - x) + 1.0;
      max_exp = x;
    }
  }
  void merge(const LogSum& o) {
    if (o.max_exp <= max_exp) {
      scaled += o.scaled * std::exp(o.max_exp - max_exp);
    } else {
      scaled = scaled * std::exp(max_exp - o.max_exp) + o.scaled;
      max_exp = o.max_exp;
    }
  }
  double value() const { return max_exp + std::log(scaled); }
};

// -H(sigma) accumulated over one Gray-code segment [t0, t1) of the 2^n walk.
LogSum enumerate_segment(const Eigen::MatrixXd& w, double beta, double h,
                         std::uint64_t t0, std::uint64_t t1) {
  const int n = static_cast<int>(w.rows());
  const std::uint64_t gray0 = t0 ^ (t0 >> 1);
  Eigen::VectorXd sigma(n);
  for (int i = 0; i < n; ++i) sigma[i] = ((gray0 >> i) & 1ull) ? 1.0 : -1.0;

  Eigen::VectorXd field = w * sigma;
  double quad = sigma.dot(field);
  double spin_sum = sigma.sum();

  LogSum acc;
  acc.add(0.5 * beta * quad + h * spin_sum);
  for (std::uint64_t t = t0 + 1; t < t1; ++t) {
    const int j = __builtin_ctzll(t);
    const double delta = -2.0 * sigma[j];
    quad += 2.0 * delta * field[j] + delta * delta * w(j, j);
    field += delta * w.col(j);
    sigma[j] += delta;
    spin_sum += delta;
    acc.add(0.5 * beta * quad + h * spin_sum);
  }
  return acc;
}

}  // namespace

double brute_force_z(const DisorderSample& d, const ModelParams& p, int threads) {
  p.validate();
  if (d.n > 22) throw std::invalid_argument("brute_force_z: n must be <= 22");
  const std::uint64_t total = 1ull << d.n;

  // fixed segmentation keeps the reduction order independent of thread count
  const int segments = (d.n >= 8) ? 64 : 1;
  const std::uint64_t seg_len = total / segments;
  std::vector<LogSum> parts(segments);
  if (threads <= 1 || segments == 1) {
    for (int s = 0; s < segments; ++s)
      parts[s] = enumerate_segment(d.j_over_sqrt_n, p.beta, p.h, s * seg_len,
                                   (s + 1) * seg_len);
  } else {
    std::vector<std::future<LogSum>> futures;
    futures.reserve(segments);
    for (int s = 0; s < segments; ++s)
      futures.push_back(std::async(std::launch::async, [&, s] {
        return enumerate_segment(d.j_over_sqrt_n, p.beta, p.h, s * seg_len,
                                 (s + 1) * seg_len);
      }));
    for (int s = 0; s < segments; ++s) parts[s] = futures[s].get();
  }
  LogSum acc;
  for (const auto& part : parts) acc.merge(part);
  return acc.value() / d.n;
}

namespace {

// Damped iteration of m <- tanh(h + beta (A m)) followed by Newton steps on
// the stationarity system; returns the final ||grad Psi||_{2,N}.
double ascend(const DisorderSample& d, const ModelParams& p, double q,
              Eigen::VectorXd& m) {
  const int n = d.n;
  const Eigen::VectorXd hvec = uniform_field(n, p.h);
  const double damping = 0.5;
  const double root_n = std::sqrt(static_cast<double>(n));

  for (int it = 0; it < 4000; ++it) {
    const Eigen::VectorXd target =
        ((p.beta * (d.a_matrix * m)).array() + p.h).tanh().matrix();
    const double step = (target - m).norm() / root_n;
    m = (1.0 - damping) * m + damping * target;
    if (step < 1e-9) break;
  }
  m = m.cwiseMin(1.0 - 1e-12).cwiseMax(-1.0 + 1e-12);
  double gn = grad_psi(m, d, p, hvec).norm() / root_n;

  for (int newton = 0; newton < 60 && gn > 1e-11; ++newton) {
    const Eigen::MatrixXd hess = hessian(m, d, p, q);
    const Eigen::VectorXd g = grad_psi(m, d, p, hvec);
    const Eigen::VectorXd step = -hess.ldlt().solve(g);
    double scale = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half) {
      Eigen::VectorXd trial = m + scale * step;
      trial = trial.cwiseMin(1.0 - 1e-12).cwiseMax(-1.0 + 1e-12);
      const double tg = grad_psi(trial, d, p, hvec).norm() / root_n;
      if (tg < gn) {
        m = trial;
        gn = tg;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;
  }
  return gn;
}

}  // namespace

MaximizeResult maximize_fht(const DisorderSample& d, const ModelParams& p, double q,
                            int restarts, std::uint64_t start_seed) {
  p.require_positive_field();
  if (d.n > 200) throw std::invalid_argument("maximize_fht: n must be <= 200");
  const int n = d.n;

  std::vector<Eigen::VectorXd> starts;
  starts.reserve(restarts + 1);
  for (int r = 0; r < restarts; ++r) {
    const double rho = 0.01 + (r + 0.5) / restarts * 0.97;
    starts.push_back(sample_shell_smooth(n, rho, start_seed, r));
  }
  starts.push_back(iterate_tap(d, p, q, 12).iterates.back());

  MaximizeResult best;
  best.value = -std::numeric_limits<double>::infinity();
  double worst_converged = std::numeric_limits<double>::infinity();
  for (auto& m : starts) {
    const double gn = ascend(d, p, q, m);
    if (gn > 1e-8) continue;
    const double value = f_ht(m, d, p, q);
    ++best.converged_starts;
    worst_converged = std::min(worst_converged, value);
    if (value > best.value) {
      best.value = value;
      best.argmax = m;
      best.grad_norm = gn;
    }
  }
  if (best.converged_starts == 0)
    throw std::runtime_error("maximize_fht: no start reached stationarity");
  best.value_spread = best.value - worst_converged;
  return best;
}

namespace {

using Complex = std::complex<double>;

Eigen::MatrixXcd complex_sqrt_of(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const int n = static_cast<int>(a.rows());
  Eigen::VectorXcd roots(n);
  for (int i = 0; i < n; ++i) {
    const double lam = es.eigenvalues()[i];
    roots[i] = lam >= 0.0 ? Complex(std::sqrt(lam), 0.0)
                          : Complex(0.0, std::sqrt(-lam));
  }
  return es.eigenvectors().cast<Complex>() * roots.asDiagonal() *
         es.eigenvectors().transpose().cast<Complex>();
}

// E_x over the tensor normal grid of
//   exp(-(x, x*) - (x*, x*)/2) * prod_j 2 cosh(sqrt(beta)(sqrt(A)(x + x*))_j + h)
// with the plain bilinear dot (no conjugation); x* = 0 gives the unshifted
// integrand.
Complex tensor_expectation(const Eigen::MatrixXcd& sqrt_a, double beta, double h,
                           const Eigen::VectorXcd& xstar, int order) {
  const int n = static_cast<int>(sqrt_a.rows());
  const QuadContext ctx = QuadContext::gauss_hermite(order);
  const double sb = std::sqrt(beta);

  Complex xstar_sq(0.0, 0.0);
  for (int j = 0; j < n; ++j) xstar_sq += xstar[j] * xstar[j];
  const Eigen::VectorXcd shift_field = sb * (sqrt_a * xstar);

  Complex acc(0.0, 0.0);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd x(n);
  while (true) {
    double wprod = 1.0;
    for (int j = 0; j < n; ++j) {
      x[j] = ctx.nodes[idx[j]];
      wprod *= ctx.weights[idx[j]];
    }
    Complex cross(0.0, 0.0);
    for (int j = 0; j < n; ++j) cross += x[j] * xstar[j];
    Complex prod = std::exp(-cross - 0.5 * xstar_sq);
    for (int j = 0; j < n; ++j) {
      Complex arg(h, 0.0);
      for (int k = 0; k < n; ++k) arg += sb * sqrt_a(j, k) * x[k];
      arg += shift_field[j];
      prod *= 2.0 * std::cosh(arg);
    }
    acc += wprod * prod;

    int pos = 0;
    while (pos < n && ++idx[pos] == ctx.order()) idx[pos++] = 0;
    if (pos == n) break;
  }
  return acc;
}

}  // namespace

HsResult hs_integral(const DisorderSample& d, const ModelParams& p, double q,
                     int order, double refine_tol) {
  p.validate();
  if (d.n > 3) throw std::invalid_argument("hs_integral: n must be <= 3");
  const Eigen::MatrixXcd sqrt_a = complex_sqrt_of(d.a_matrix);
  const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(d.n);
  const Complex coarse = tensor_expectation(sqrt_a, p.beta, p.h, zero, order);
  const Complex fine = tensor_expectation(sqrt_a, p.beta, p.h, zero, 2 * order);
  const double rel = std::abs(fine - coarse) / std::abs(fine);
  if (rel > refine_tol)
    throw std::runtime_error("hs_integral: refinement moved the value by " +
                             std::to_string(rel) + " relative (order too low)");
  const double prefactor = std::exp(0.5 * d.n * p.beta * p.beta * (1.0 - q));
  return {prefactor * fine, rel};
}

ShiftedHsResult shifted_hs_integral(const DisorderSample& d, const ModelParams& p,
                                    double q, const Eigen::VectorXd& z, int order) {
  p.validate();
  if (d.n > 3) throw std::invalid_argument("shifted_hs_integral: n must be <= 3");
  const Eigen::MatrixXcd sqrt_a = complex_sqrt_of(d.a_matrix);
  const Eigen::VectorXcd xstar =
      std::sqrt(p.beta) * (sqrt_a * z.cast<Complex>());
  const Complex raw = tensor_expectation(sqrt_a, p.beta, p.h, xstar, order);
  const double prefactor = std::exp(0.5 * d.n * p.beta * p.beta * (1.0 - q));

  ShiftedHsResult out;
  out.value = prefactor * raw;
  out.phi_z = phi_fn(z, d, p, uniform_field(d.n, p.h));
  out.remainder = (std::log(raw) - Complex(out.phi_z, 0.0)) / static_cast<double>(d.n);
  return out;
}

GapStudy gap_study(const ModelParams& p, const std::vector<int>& sizes,
                   int seeds_per_size, std::uint64_t base_seed, int restarts,
                   int threads) {
  p.require_positive_field();
  const double q = solve_q(p).q;

  GapStudy study;
  study.sizes = sizes;
  auto run_row = [&](int n, std::uint64_t seed) {
    const DisorderSample d = sample_disorder(n, seed, p, q);
    GapRow row;
    row.n = n;
    row.seed = seed;
    row.log_z_per_spin = brute_force_z(d, p);
    const MaximizeResult mx = maximize_fht(d, p, q, restarts);
    row.sup_fht = mx.value;
    row.gap = std::abs(row.log_z_per_spin - row.sup_fht);
    row.q_ea_argmax = q_ea(mx.argmax);
    return row;
  };

  for (int n : sizes) {
    std::vector<GapRow> rows(seeds_per_size);
    if (threads <= 1) {
      for (int s = 0; s < seeds_per_size; ++s)
        rows[s] = run_row(n, base_seed + 1000ull * n + s);
    } else {
      std::vector<std::future<GapRow>> futures;
      futures.reserve(seeds_per_size);
      for (int s = 0; s < seeds_per_size; ++s)
        futures.push_back(std::async(std::launch::async, run_row, n,
                                     base_seed + 1000ull * n + s));
      for (int s = 0; s < seeds_per_size; ++s) rows[s] = futures[s].get();
    }
    double mean = 0.0;
    for (const auto& r : rows) mean += r.gap;
    mean /= seeds_per_size;
    double var = 0.0;
    for (const auto& r : rows) var += (r.gap - mean) * (r.gap - mean);
    var = seeds_per_size > 1 ? var / (seeds_per_size - 1) : 0.0;
    study.mean_gap.push_back(mean);
    study.stddev_gap.push_back(std::sqrt(var));
    study.rows.insert(study.rows.end(), rows.begin(), rows.end());
  }
  return study;
}

std::string gap_csv(const GapStudy& g) {
  std::ostringstream out;
  out.precision(17);
  out << "n,seed,log_z_per_spin,sup_fht,gap,q_ea_argmax\n";
  for (const auto& r : g.rows) {
    out << r.n << ',' << r.seed << ',' << r.log_z_per_spin << ',' << r.sup_fht
        << ',' << r.gap << ',' << r.q_ea_argmax << '\n';
  }
  return out.str();
}

}  // namespace sk
