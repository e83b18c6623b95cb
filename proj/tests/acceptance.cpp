// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Workload sizes and tolerances are pinned here; an optional
// argument selects a single criterion by number.

#include "oracles.hpp"
#include "sk/disorder.hpp"
#include "sk/eigs.hpp"
#include "sk/exact.hpp"
#include "sk/functionals.hpp"
#include "sk/harness.hpp"
#include "sk/hessian.hpp"
#include "sk/rng.hpp"
#include "sk/rs_scalars.hpp"
#include "sk/tap.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

using namespace sk;

namespace {

int failures = 0;

void report(int number, const std::string& what, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", number,
              what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

double fit_r2(const std::vector<double>& logs, int from, int to) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (int k = from; k <= to; ++k) {
    sx += k; sy += logs[k]; sxx += double(k) * k; sxy += k * logs[k];
    syy += logs[k] * logs[k];
    ++n;
  }
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  return cov * cov / (vx * vy);
}

// 1. scalar suite: fixed point, overlap-map consistency, closed forms, erfc
void criterion_1() {
  double worst_residual = 0.0, worst_psi = 0.0;
  bool ok = true;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const ModelParams p{0.1 + i * (2.9 / 19.0), 0.1 + j * (4.9 / 19.0)};
      const RsSolution sol = solve_q(p);
      worst_residual = std::max(worst_residual, sol.residual);
      worst_psi = std::max(worst_psi, std::abs(psi_map(sol.q, p, sol.q) - sol.q));
    }
  }
  ok = ok && worst_residual <= 1e-12 && worst_psi <= 1e-10;

  double worst_rel = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double a = 5.0 * uniform_pos(mix64(404, 2 * t));
    const double b = 10.0 * uniform_half_open(mix64(404, 2 * t + 1));
    const QuadContext ctx = oracle::normal_rule_with_kink(-b / a);
    const double abs_ref = gauss_expect([&](double z) { return std::abs(a * z + b); }, ctx);
    const double exp_ref =
        gauss_expect([&](double z) { return std::exp(-std::abs(a * z + b)); }, ctx);
    const double wexp_ref = gauss_expect(
        [&](double z) {
          const double u = std::abs(a * z + b);
          return u * std::exp(-u);
        }, ctx);
    worst_rel = std::max(worst_rel,
                         std::abs(abs_gauss_moment(a, b) - abs_ref) / std::abs(abs_ref));
    worst_rel = std::max(worst_rel, std::abs(exp_abs_gauss(a, b) - exp_ref) /
                                        std::max(std::abs(exp_ref), 1e-300));
    worst_rel = std::max(worst_rel, std::abs(weighted_exp_abs_gauss(a, b) - wexp_ref) /
                                        std::max(std::abs(wexp_ref), 1e-300));
  }
  ok = ok && worst_rel <= 1e-8;

  bool erfc_ok = true;
  for (int i = 0; i <= 100; ++i) {
    const double z = 0.1 * i;
    const double scaled = std::sqrt(M_PI / 2.0) * erfc_scaled_exp(z);
    erfc_ok = erfc_ok && scaled >= erfc_bound_lower(z) - 1e-14 &&
              scaled <= erfc_bound_upper(z) + 1e-14;
  }
  ok = ok && erfc_ok;
  report(1, "scalar suite", ok,
         fmt("max residual %.2e, max |psi(q)-q| %.2e, max closed-form rel err %.2e",
             worst_residual, worst_psi, worst_rel));
}

// 2. scalar sequence at (0.3, 0.5)
void criterion_2() {
  const ModelParams p{0.3, 0.5};
  const RsSolution sol = solve_q(p);
  const GammaRhoSeq seq = gamma_rho_sequence(p, 61);
  bool ok = std::abs(seq.rhos[59] - sol.q) <= 1e-6;
  for (int k = 0; k + 1 < 61; ++k) {
    ok = ok && seq.rho_gaps[k + 1] < seq.rho_gaps[k];       // rho_k increasing
    ok = ok && seq.rho_gaps[k + 1] > 0.0;                   // rho_{k+1} < q
    ok = ok && seq.gamma_sq_gaps[k] > seq.rho_gaps[k + 1];  // Gamma^2_k < rho_{k+1}
  }
  report(2, "sequence suite", ok,
         fmt("|rho_60 - q| = %.2e, final gap ratio %.4f",
             std::abs(seq.rhos[59] - sol.q),
             seq.rho_gaps[60] / seq.rho_gaps[59]));
}

// 3. duality suite at N = 50
void criterion_3() {
  const ModelParams p{0.3, 0.5};
  const double q = solve_q(p).q;
  const int n = 50;
  const DisorderSample d = sample_disorder(n, 333, p, q);
  const Eigen::VectorXd hvec = uniform_field(n, p.h);

  auto random_m = [&](std::uint64_t idx, double amp) {
    Eigen::VectorXd m(n);
    for (int i = 0; i < n; ++i)
      m[i] = amp * (2.0 * uniform_half_open(mix64(777, idx * n + i)) - 1.0);
    return m;
  };

  bool fenchel_ok = true;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::VectorXd m = random_m(t, 0.999);
    fenchel_ok = fenchel_ok && psi_fn(m, d, p, hvec) <= phi_fn(m, d, p, hvec) + 1e-9;
  }

  double worst_eq = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd mbar = random_m(5000 + t, 0.9);
    const Eigen::VectorXd hbar = modified_field(mbar, d, p, hvec);
    worst_eq = std::max(worst_eq,
                        std::abs(psi_fn(mbar, d, p, hbar) - phi_fn(mbar, d, p, hbar)));
  }

  bool prop_ok = true;
  for (int t = 0; t < 200; ++t) {
    const Eigen::VectorXd m = random_m(9000 + t, 0.98);
    const double lhs = std::abs(psi_fn(m, d, p, hvec) - phi_fn(m, d, p, hvec)) / n;
    const double rhs = 2.0 / std::sqrt(double(n)) * grad_psi(m, d, p, hvec).norm();
    prop_ok = prop_ok && lhs <= rhs + 1e-12;
  }

  const bool ok = fenchel_ok && worst_eq <= 1e-10 && prop_ok;
  report(3, "duality suite", ok, fmt("worst critical-point equality %.2e", worst_eq));
}

// 4. TAP convergence at N = 2000, 20 seeds, K = 12
void criterion_4() {
  const ModelParams p{0.3, 0.5};
  const RsSolution sol = solve_q(p);
  int qea_ok = 0, fht_ok = 0, fit_ok = 0;
  double worst_qdev = 0.0, worst_fdev = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DisorderSample d = sample_disorder(2000, seed, p, sol.q);
    const IterateTrace t = iterate_tap(d, p, sol.q, 12);
    const double qdev = std::abs(t.norms_sq[12] - sol.q);
    const double fdev = std::abs(t.fht_values[12] - sol.sk);
    worst_qdev = std::max(worst_qdev, qdev);
    worst_fdev = std::max(worst_fdev, fdev);
    if (qdev < 0.03) ++qea_ok;
    if (fdev < 0.02) ++fht_ok;
    const auto incr = cauchy_increments(t);
    std::vector<double> logs;
    for (double v : incr) logs.push_back(std::log(std::max(v, 1e-300)));
    if (fit_r2(logs, 2, 10) > 0.9) ++fit_ok;
  }
  const bool ok = qea_ok >= 18 && fht_ok >= 18 && fit_ok >= 18;
  report(4, "TAP convergence", ok,
         fmt("q_EA ok %g/20, F^HT ok %g/20, decay fit ok %g/20", qea_ok, fht_ok, fit_ok));
}

// 5. conditioned construction at N = 2000, 5 seeds, K = 8
void criterion_5() {
  const ModelParams p{0.3, 0.5};
  const RsSolution sol = solve_q(p);
  const GammaRhoSeq seq = gamma_rho_sequence(p, 8);
  double worst_ortho = 0.0, worst_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DisorderSample d = sample_disorder(2000, seed, p, sol.q);
    const ConditionedState st = conditioned_iterate(d, p, sol.q, seq, 8);
    const IterateTrace t = iterate_tap(d, p, sol.q, 8);
    for (std::size_t a = 0; a < st.phis.size(); ++a)
      for (std::size_t b = 0; b <= a; ++b) {
        const double ip = st.phis[a].dot(st.phis[b]) / 2000.0;
        worst_ortho = std::max(worst_ortho, std::abs(ip - (a == b ? 1.0 : 0.0)));
      }
    for (std::size_t k = 0; k < st.mbars.size(); ++k)
      worst_gap = std::max(worst_gap,
                           (st.mbars[k] - t.iterates[k + 1]).cwiseAbs().mean());
  }
  const bool ok = worst_ortho <= 1e-10 && worst_gap < 0.05;
  report(5, "conditioned construction", ok,
         fmt("worst orthonormality %.2e, worst coordinate gap %.3f", worst_ortho,
             worst_gap));
}

// 6. spectral suite
void criterion_6() {
  const ModelParams p_edge{0.3, 0.5};
  const double q_edge = solve_q(p_edge).q;
  int geman_ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DisorderSample d = sample_disorder(2000, seed, p_edge, q_edge);
    if (std::abs(spectral_radius(d.j_over_sqrt_n, 1e-8) - 2.0) < 0.1) ++geman_ok;
  }

  // sign equivalence at 50 points, N = 300, across both signs of lambda_max
  bool sign_ok = true;
  int negatives = 0, positives = 0;
  {
    int count = 0;
    for (double beta : {0.4, 0.9, 1.6}) {
      const ModelParams p{beta, 1.0};
      const double q = solve_q(p).q;
      const DisorderSample d = sample_disorder(300, 606, p, q);
      for (int t = 0; t < 17 && count < 50; ++t, ++count) {
        const Eigen::VectorXd m = sample_cube_point(300, 7000 + count, count);
        const double lh = extreme_eigenvalues(hessian(m, d, p, q), 1e-8).lambda_max;
        const double lc = extreme_eigenvalues(c_matrix(m, d, p, q), 1e-8).lambda_max;
        sign_ok = sign_ok && ((lh < 0.0) == (beta * lc < 1.0));
        (lh < 0.0 ? negatives : positives) += 1;
      }
    }
  }

  // Hessian negativity over the cube at a half-plane point, N = 500
  const ModelParams p1{0.4, 1.0};
  const RsSolution sol1 = solve_q(p1);
  bool neg_ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DisorderSample d = sample_disorder(500, seed, p1, sol1.q);
    const auto reports =
        negativity_scan(d, p1, sol1.q, ScanSet::Cube, 0.0, 0.5, 100, seed * 131);
    for (const auto& r : reports) {
      neg_ok = neg_ok && r.hessian_negative && r.sign_equivalent;
      neg_ok = neg_ok && r.lambda_max_h <= r.f2_bound + 1e-12;
    }
  }

  // norm bound at N = 300, 50 draws, eps = 0.5
  int bvh_ok = 0;
  {
    const Eigen::VectorXd m = sample_shell_smooth(300, 0.6, 909, 0);
    const double bound = bvh_bound(m, p1, sol1.q, 0.5);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const DisorderSample d = sample_disorder(300, 3000 + seed, p1, sol1.q);
      if (spectral_radius(c_matrix(m, d, p1, sol1.q), 1e-8) <= bound) ++bvh_ok;
    }
  }

  // exact decomposition at machine precision
  double worst_split = 0.0;
  {
    const DisorderSample d = sample_disorder(200, 17, p1, sol1.q);
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXd m = sample_shell_smooth(200, 0.7, 42 + t, t);
      const CDecomposition dec = decompose_c(m, d, p1, sol1.q, 0.5, 0.1);
      const Eigen::MatrixXd c = c_matrix(m, d, p1, sol1.q);
      worst_split = std::max(worst_split,
                             (dec.under + dec.circ + dec.over - c).cwiseAbs().maxCoeff());
    }
  }

  const bool ok =
      geman_ok >= 18 && sign_ok && neg_ok && bvh_ok >= 48 && worst_split <= 1e-14;
  report(6, "spectral suite", ok,
         fmt("|r-2|<0.1 in %g/20, bvh %g/50, split err %.1e", geman_ok, bvh_ok,
             worst_split) +
             fmt(", sign pairs -/+ = %g/%g", negatives, positives));
}

// 7. strict negativity of the scalar defect below rho_bar
void criterion_7() {
  bool psi_ok = true;
  double worst_sup = -1e300;
  for (const ModelParams p : {ModelParams{1.0, 4.0}, ModelParams{2.0, 6.0},
                              ModelParams{3.0, 10.0}}) {
    const double q = solve_q(p).q;
    const bool in_d3 = (p.h / p.beta > 2.0) && (p.beta * p.beta * (1.0 - q) <= 1.0) &&
                       (p.h >= 4.0);
    psi_ok = psi_ok && in_d3;
    const double rb = rho_bar(p, q);
    psi_ok = psi_ok && rb < q;
    for (int i = 0; i < 2000; ++i) {
      const double rho = rb * i / 2000.0;
      const double v = psi_rho(rho, p, q);
      worst_sup = std::max(worst_sup, v);
      psi_ok = psi_ok && v < 0.0;
    }
  }

  // sandwiches on 1-q at their hypothesis points
  bool sandwich_ok = true;
  {
    const ModelParams p{0.5, 1.0};
    const double q = solve_q(p).q;
    const auto [lo, hi] = one_minus_q_bounds(p, q);
    sandwich_ok = sandwich_ok && lo <= 1.0 - q && 1.0 - q <= hi;
  }
  {
    const ModelParams p{30.0, 85.0};
    const double q = solve_q(p).q;
    sandwich_ok = sandwich_ok && p.h <= 0.1 * p.beta * p.beta * q;  // eta = 1/20
    const auto [lo, hi] = one_minus_q_bounds(p, q);
    sandwich_ok = sandwich_ok && lo <= 1.0 - q && 1.0 - q <= hi;
  }

  report(7, "scalar negativity below rho_bar", psi_ok && sandwich_ok,
         fmt("sup psi over the grids %.3e", worst_sup));
}

// 8. exact small-N suite
void criterion_8() {
  const ModelParams p{0.3, 0.5};
  const double q = solve_q(p).q;

  // hand enumeration at N <= 2
  bool hand_ok = true;
  {
    const DisorderSample d1 = sample_disorder(1, 11, p, q);
    const double expected1 = std::log(
        2.0 * std::exp(0.5 * p.beta * d1.j_over_sqrt_n(0, 0)) * std::cosh(p.h));
    hand_ok = hand_ok && std::abs(brute_force_z(d1, p) - expected1) <= 1e-14;
    const DisorderSample d2 = sample_disorder(2, 4, p, q);
    double z = 0.0;
    for (int s0 : {-1, 1})
      for (int s1 : {-1, 1})
        z += std::exp(0.5 * p.beta *
                          (d2.j_over_sqrt_n(0, 0) + d2.j_over_sqrt_n(1, 1) +
                           2.0 * d2.j_over_sqrt_n(0, 1) * s0 * s1) +
                      p.h * (s0 + s1));
    hand_ok = hand_ok && std::abs(brute_force_z(d2, p) - std::log(z) / 2.0) <= 1e-14;
  }

  // integral representation at N = 2
  double hs_rel = 0.0, hs_imag = 0.0, shift_dev = 0.0, recon_err = 0.0;
  {
    const DisorderSample d = sample_disorder(2, 4, p, q);
    const double log_z = brute_force_z(d, p);
    const double z_exact = std::exp(2.0 * log_z);
    const HsResult hs = hs_integral(d, p, q, 120);
    hs_rel = std::abs(hs.value.real() - z_exact) / z_exact;
    hs_imag = std::abs(hs.value.imag()) / z_exact;
    for (int t = 0; t < 3; ++t) {
      Eigen::VectorXd z(2);
      z[0] = 1.8 * (uniform_half_open(mix64(515, 2 * t)) - 0.5);
      z[1] = 1.8 * (uniform_half_open(mix64(515, 2 * t + 1)) - 0.5);
      const ShiftedHsResult sh = shifted_hs_integral(d, p, q, z, 120);
      shift_dev = std::max(shift_dev, std::abs(sh.value - hs.value) / z_exact);
      const double recon = sh.phi_z / 2.0 + 0.5 * p.beta * p.beta * (1.0 - q) +
                           sh.remainder.real();
      recon_err = std::max(recon_err, std::abs(recon - log_z));
    }
  }
  const bool hs_ok =
      hs_rel < 1e-6 && hs_imag < 1e-8 && shift_dev < 2e-6 && recon_err < 1e-6;

  // finite-size trend of the gap, 30 seeds per size (seed set pinned by the
  // development run: measured means 0.0201 / 0.0119 / 0.0084)
  const GapStudy g = gap_study(p, {8, 12, 16}, 30, 2000, 16, 1);
  const bool trend_ok = g.mean_gap[1] < g.mean_gap[0] && g.mean_gap[2] < g.mean_gap[1];
  const bool level_ok = g.mean_gap[1] < 0.02;

  report(8, "exact small-N suite", hand_ok && hs_ok && trend_ok && level_ok,
         fmt("hs rel %.1e, shift dev %.1e, ", hs_rel, shift_dev) +
             fmt("mean gaps %.4f / %.4f / %.4f", g.mean_gap[0], g.mean_gap[1],
                 g.mean_gap[2]));
}

// 9. region logic on a 50-point grid
void criterion_9() {
  bool ok = true;
  int tilde_members = 0;
  int checked = 0;
  const double betas_small[] = {0.1, 0.2, 0.3, 0.4, 0.45};
  const double hs_small[] = {0.5, 1.0, 2.0, 4.0, 8.0};
  for (double beta : betas_small)
    for (double h : hs_small) {
      const RegionReport r = classify_region({beta, h});
      ok = ok && r.in_d1;
      ok = ok && (!r.in_d_tilde2 || (r.in_d && r.in_at));
      ++checked;
    }
  const double betas_large[] = {80.0, 100.0, 120.0, 140.0, 160.0};
  const double ratios[] = {7.5, 8.5, 9.0, 9.5, 10.0};
  for (double beta : betas_large)
    for (double ratio : ratios) {
      const RegionReport r = classify_region({beta, beta * ratio});
      if (r.in_d_tilde2) {
        ++tilde_members;
        ok = ok && r.in_d && r.in_at;
      }
      ++checked;
    }
  ok = ok && checked == 50 && tilde_members > 0;
  report(9, "region logic", ok,
         fmt("%g grid points, %g genuine large-field members", checked,
             tilde_members));
}

// 10. reproducibility of the harness output
void criterion_10() {
  ExperimentConfig cfg;
  cfg.command = "tap-run";
  cfg.beta = 0.3;
  cfg.h = 0.5;
  cfg.n_values = {200};
  cfg.seeds = {21, 22, 23, 24};
  cfg.k_max = 6;
  cfg.threads = 1;
  const std::string first = render({run_experiment(cfg)}, cfg);
  const std::string second = render({run_experiment(cfg)}, cfg);
  cfg.threads = 8;
  const std::string threaded = render({run_experiment(cfg)}, cfg);

  ExperimentConfig rs = cfg;
  rs.command = "rs-solve";
  rs.format = OutputFormat::Json;
  const std::string j1 = render({run_experiment(rs)}, rs);
  const std::string j2 = render({run_experiment(rs)}, rs);

  const bool ok = first == second && first == threaded && j1 == j2 && !first.empty();
  report(10, "reproducibility", ok,
         fmt("payload bytes %g", static_cast<double>(first.size())));
}

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  const auto t0 = std::chrono::steady_clock::now();
  using Fn = void (*)();
  const Fn criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                         criterion_5, criterion_6, criterion_7, criterion_8,
                         criterion_9, criterion_10};
  for (int i = 0; i < 10; ++i) {
    if (only != 0 && only != i + 1) continue;
    criteria[i]();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "acceptance wall time: %.1f s\n", elapsed);
  if (failures > 0) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
