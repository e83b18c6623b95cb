#include "sk/harness.hpp"

#include "sk/disorder.hpp"
#include "sk/exact.hpp"
#include "sk/functionals.hpp"
#include "sk/hessian.hpp"
#include "sk/rng.hpp"
#include "sk/rs_scalars.hpp"
#include "sk/tap.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sk {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  // either "a,b,c" or "base:count"
  const auto colon = s.find(':');
  std::vector<std::uint64_t> seeds;
  if (colon != std::string::npos) {
    const std::uint64_t base = std::stoull(s.substr(0, colon));
    const std::uint64_t count = std::stoull(s.substr(colon + 1));
    for (std::uint64_t i = 0; i < count; ++i) seeds.push_back(base + i);
  } else {
    for (const auto& tok : split(s, ',')) seeds.push_back(std::stoull(tok));
  }
  return seeds;
}

int effective_threads(const ExperimentConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Ordered fan-out: results land by index regardless of scheduling.
template <class T, class F>
std::vector<T> ordered_parallel(int count, int threads, F&& job) {
  std::vector<T> out(count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) out[i] = job(i);
    return out;
  }
  int next = 0;
  while (next < count) {
    const int batch = std::min(threads, count - next);
    std::vector<std::future<T>> fs;
    fs.reserve(batch);
    for (int b = 0; b < batch; ++b)
      fs.push_back(std::async(std::launch::async, job, next + b));
    for (int b = 0; b < batch; ++b) out[next + b] = fs[b].get();
    next += batch;
  }
  return out;
}

double fit_log_linear_r2(const std::vector<double>& ys_log, int k_from, int k_to) {
  // least squares of ys_log[k] against k over [k_from, k_to]
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (int k = k_from; k <= k_to; ++k) {
    const double x = k, y = ys_log[k];
    sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
    ++n;
  }
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  if (vx <= 0 || vy <= 0) return 0.0;
  return (cov * cov) / (vx * vy);
}

void echo_common(ResultRecord& rec, const ExperimentConfig& cfg) {
  rec.params.emplace_back("command", cfg.command);
  rec.params.emplace_back("beta", fmt(cfg.beta));
  rec.params.emplace_back("h", fmt(cfg.h));
}

ResultRecord run_rs_solve(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "rs-solve";
  echo_common(rec, cfg);
  const ModelParams p{cfg.beta, cfg.h};
  const RsSolution sol = solve_q(p);
  rec.columns = {"beta", "h", "q", "sk", "at_value", "residual", "at_ok"};
  rec.rows.push_back({p.beta, p.h, sol.q, sol.sk, sol.at_value, sol.residual,
                      sol.at_value <= 1.0 ? 1.0 : 0.0});
  rec.checks.emplace_back("rs_residual_le_1e12",
                          sol.residual <= cfg.tolerance("rs_residual", 1e-12));
  return rec;
}

ResultRecord run_region_classify(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "region-classify";
  echo_common(rec, cfg);
  const ModelParams p{cfg.beta, cfg.h};
  const RegionReport r = classify_region(p);
  rec.columns = {"beta", "h", "q", "at_value", "in_d1", "in_d2", "in_d3", "in_d4",
                 "in_d_tilde2", "in_at", "in_d", "rho_bar", "theta_rho_bar", "r_bh"};
  rec.rows.push_back({p.beta, p.h, r.q, r.at_value, double(r.in_d1), double(r.in_d2),
                      double(r.in_d3), double(r.in_d4), double(r.in_d_tilde2),
                      double(r.in_at), double(r.in_d), r.rho_bar, r.theta_of_rho_bar,
                      r.r_bh});
  rec.checks.emplace_back("region_tilde2_implies_d_and_at",
                          !r.in_d_tilde2 || (r.in_d && r.in_at));
  return rec;
}

ResultRecord run_tap(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "tap-run";
  echo_common(rec, cfg);
  rec.params.emplace_back("k_max", std::to_string(cfg.k_max));
  const ModelParams p{cfg.beta, cfg.h};
  const RsSolution sol = solve_q(p);
  const double sk_value = sol.sk;
  rec.columns = {"n", "seed", "q_ea", "fht", "ftap", "grad_norm", "decay_r2",
                 "qea_dev", "fht_dev"};

  const double qea_tol = cfg.tolerance("tap_qea", 0.03);
  const double fht_tol = cfg.tolerance("tap_fht", 0.02);
  const double r2_min = cfg.tolerance("tap_decay_r2", 0.9);

  for (int n : cfg.n_values) {
    auto job = [&, n](int i) {
      const std::uint64_t seed = cfg.seeds[i];
      const DisorderSample d = sample_disorder(n, seed, p, sol.q);
      const IterateTrace t = iterate_tap(d, p, sol.q, cfg.k_max);
      const int K = cfg.k_max;
      const auto incr = cauchy_increments(t);
      std::vector<double> logs(incr.size());
      for (std::size_t k = 0; k < incr.size(); ++k)
        logs[k] = std::log(std::max(incr[k], 1e-300));
      const int fit_hi = std::min<int>(10, static_cast<int>(incr.size()) - 1);
      const double r2 = fit_log_linear_r2(logs, 2, fit_hi);
      return std::vector<double>{double(n), double(seed), t.norms_sq[K],
                                 t.fht_values[K], t.ftap_values[K], t.grad_norms[K],
                                 r2, std::abs(t.norms_sq[K] - sol.q),
                                 std::abs(t.fht_values[K] - sk_value)};
    };
    auto rows = ordered_parallel<std::vector<double>>(
        static_cast<int>(cfg.seeds.size()), effective_threads(cfg), job);
    rec.rows.insert(rec.rows.end(), rows.begin(), rows.end());
  }

  int qea_ok = 0, fht_ok = 0, r2_ok = 0;
  for (const auto& row : rec.rows) {
    if (row[7] < qea_tol) ++qea_ok;
    if (row[8] < fht_tol) ++fht_ok;
    if (row[6] > r2_min) ++r2_ok;
  }
  const int total = static_cast<int>(rec.rows.size());
  const int needed = static_cast<int>(std::ceil(0.9 * total));
  rec.checks.emplace_back("tap_qea_within_tol_90pct", qea_ok >= needed);
  rec.checks.emplace_back("tap_fht_within_tol_90pct", fht_ok >= needed);
  rec.checks.emplace_back("tap_geometric_decay_r2", r2_ok >= needed);
  return rec;
}

ResultRecord run_tap_conditioned(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "tap-conditioned";
  echo_common(rec, cfg);
  rec.params.emplace_back("k_max", std::to_string(cfg.k_max));
  const ModelParams p{cfg.beta, cfg.h};
  const RsSolution sol = solve_q(p);
  const GammaRhoSeq seq = gamma_rho_sequence(p, std::max(cfg.k_max, 2));
  rec.columns = {"n", "seed", "ortho_err", "mbar_gap_max"};

  for (int n : cfg.n_values) {
    auto job = [&, n](int i) {
      const std::uint64_t seed = cfg.seeds[i];
      const DisorderSample d = sample_disorder(n, seed, p, sol.q);
      const ConditionedState st = conditioned_iterate(d, p, sol.q, seq, cfg.k_max);
      const IterateTrace t = iterate_tap(d, p, sol.q, cfg.k_max);
      double ortho = 0.0;
      for (std::size_t a = 0; a < st.phis.size(); ++a)
        for (std::size_t b = 0; b <= a; ++b) {
          const double ip = st.phis[a].dot(st.phis[b]) / n;
          ortho = std::max(ortho, std::abs(ip - (a == b ? 1.0 : 0.0)));
        }
      double gap = 0.0;
      for (std::size_t k = 0; k < st.mbars.size(); ++k)
        gap = std::max(gap,
                       (st.mbars[k] - t.iterates[k + 1]).cwiseAbs().mean());
      return std::vector<double>{double(n), double(seed), ortho, gap};
    };
    auto rows = ordered_parallel<std::vector<double>>(
        static_cast<int>(cfg.seeds.size()), effective_threads(cfg), job);
    rec.rows.insert(rec.rows.end(), rows.begin(), rows.end());
  }
  bool ortho_ok = true, gap_ok = true;
  for (const auto& row : rec.rows) {
    ortho_ok = ortho_ok && row[2] <= cfg.tolerance("cond_ortho", 1e-10);
    gap_ok = gap_ok && row[3] < cfg.tolerance("cond_gap", 0.05);
  }
  rec.checks.emplace_back("conditioned_orthonormal", ortho_ok);
  rec.checks.emplace_back("conditioned_matches_plain", gap_ok);
  return rec;
}

ResultRecord run_hessian_scan(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "hessian-scan";
  echo_common(rec, cfg);
  rec.params.emplace_back("scan", cfg.scan);
  const ModelParams p{cfg.beta, cfg.h};
  const RsSolution sol = solve_q(p);
  const RegionReport region = classify_region(p);

  ScanSet set = ScanSet::Cube;
  if (cfg.scan == "shell") set = ScanSet::ShellSmooth;
  if (cfg.scan == "shell-rejection") set = ScanSet::ShellRejection;

  rec.columns = {"n", "seed", "point_id", "q_ea", "lambda_max_h", "lambda_max_c",
                 "f2_bound", "bvh_bound", "sign_eq", "h_neg"};
  bool all_sign = true, all_neg = true;
  for (int n : cfg.n_values) {
    for (const std::uint64_t seed : cfg.seeds) {
      const DisorderSample d = sample_disorder(n, seed, p, sol.q);
      const auto reports =
          negativity_scan(d, p, sol.q, set, cfg.rho, cfg.eps, cfg.n_points, seed ^ 0xABCDull);
      for (const auto& r : reports) {
        rec.rows.push_back({double(n), double(seed), double(r.point_id), r.q_ea_point,
                            r.lambda_max_h, r.lambda_max_c, r.f2_bound,
                            r.bvh_mean_bound, double(r.sign_equivalent),
                            double(r.hessian_negative)});
        all_sign = all_sign && r.sign_equivalent;
        all_neg = all_neg && r.hessian_negative;
      }
    }
  }
  rec.checks.emplace_back("hessian_sign_equivalence", all_sign);
  if (region.in_d1)
    rec.checks.emplace_back("hessian_negative_in_d1", all_neg);
  return rec;
}

ResultRecord run_bound_bvh(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "bound-bvh";
  echo_common(rec, cfg);
  const ModelParams p{cfg.beta, cfg.h};
  const RsSolution sol = solve_q(p);
  rec.columns = {"n", "seed", "norm_c", "bound", "ok"};
  int total = 0, ok_count = 0;
  for (int n : cfg.n_values) {
    const Eigen::VectorXd m =
        cfg.rho > 0.0 ? sample_shell_smooth(n, cfg.rho, 77, 0)
                      : Eigen::VectorXd::Zero(n);
    const double bound = bvh_bound(m, p, sol.q, cfg.eps);
    auto job = [&, n](int i) {
      const std::uint64_t seed = cfg.seeds[i];
      const DisorderSample d = sample_disorder(n, seed, p, sol.q);
      const double norm_c = spectral_radius(c_matrix(m, d, p, sol.q), 1e-8);
      return std::vector<double>{double(n), double(seed), norm_c, bound,
                                 norm_c <= bound ? 1.0 : 0.0};
    };
    auto rows = ordered_parallel<std::vector<double>>(
        static_cast<int>(cfg.seeds.size()), effective_threads(cfg), job);
    for (const auto& row : rows) {
      ++total;
      if (row[4] > 0.5) ++ok_count;
      rec.rows.push_back(row);
    }
  }
  rec.checks.emplace_back("bvh_bound_holds_96pct",
                          ok_count >= static_cast<int>(std::ceil(0.96 * total)));
  return rec;
}

ResultRecord run_exact_compare(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "exact-compare";
  echo_common(rec, cfg);
  const ModelParams p{cfg.beta, cfg.h};
  const RsSolution sol = solve_q(p);
  rec.columns = {"n", "seed", "log_z", "sup_fht", "gap", "q_ea_argmax"};
  for (int n : cfg.n_values) {
    auto job = [&, n](int i) {
      const std::uint64_t seed = cfg.seeds[i];
      const DisorderSample d = sample_disorder(n, seed, p, sol.q);
      const double log_z = brute_force_z(d, p);
      const MaximizeResult mx = maximize_fht(d, p, sol.q, cfg.restarts);
      return std::vector<double>{double(n), double(seed), log_z, mx.value,
                                 std::abs(log_z - mx.value), q_ea(mx.argmax)};
    };
    auto rows = ordered_parallel<std::vector<double>>(
        static_cast<int>(cfg.seeds.size()), effective_threads(cfg), job);
    rec.rows.insert(rec.rows.end(), rows.begin(), rows.end());
  }
  return rec;
}

ResultRecord run_hs_verify(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "hs-verify";
  echo_common(rec, cfg);
  rec.params.emplace_back("order", std::to_string(cfg.order));
  const ModelParams p{cfg.beta, cfg.h};
  const RsSolution sol = solve_q(p);
  const int n = cfg.n_values.front();
  if (n > 3) throw std::invalid_argument("hs-verify: n must be <= 3");
  rec.columns = {"n", "seed", "log_z", "hs_rel_err", "hs_imag_ratio", "shift_dev",
                 "reconstruction_err"};

  bool identity_ok = true, imag_ok = true, shift_ok = true, recon_ok = true;
  const double id_tol = cfg.tolerance("hs_identity", 1e-6);
  const double imag_tol = cfg.tolerance("hs_imag", 1e-8);
  const double shift_tol = cfg.tolerance("hs_shift", 2e-6);
  const double recon_tol = cfg.tolerance("hs_reconstruction", 1e-6);

  for (const std::uint64_t seed : cfg.seeds) {
    const DisorderSample d = sample_disorder(n, seed, p, sol.q);
    const double log_z = brute_force_z(d, p);
    const double z_exact = std::exp(n * log_z);
    const HsResult hs = hs_integral(d, p, sol.q, cfg.order);
    const double rel_err = std::abs(hs.value.real() - z_exact) / z_exact;
    const double imag_ratio = std::abs(hs.value.imag()) / z_exact;

    double shift_dev = 0.0, recon_err = 0.0;
    for (int r = 0; r < 3; ++r) {
      Eigen::VectorXd z(n);
      for (int i = 0; i < n; ++i)
        z[i] = 1.8 * (uniform_half_open(mix64(seed ^ 0x5157ull, r * n + i)) - 0.5);
      const ShiftedHsResult sh = shifted_hs_integral(d, p, sol.q, z, cfg.order);
      shift_dev = std::max(shift_dev, std::abs(sh.value - hs.value) / z_exact);
      const double recon = sh.phi_z / n + 0.5 * p.beta * p.beta * (1.0 - sol.q) +
                           sh.remainder.real();
      recon_err = std::max(recon_err, std::abs(recon - log_z));
    }
    rec.rows.push_back({double(n), double(seed), log_z, rel_err, imag_ratio,
                        shift_dev, recon_err});
    identity_ok = identity_ok && rel_err < id_tol;
    imag_ok = imag_ok && imag_ratio < imag_tol;
    shift_ok = shift_ok && shift_dev < shift_tol;
    recon_ok = recon_ok && recon_err < recon_tol;
  }
  rec.checks.emplace_back("hs_identity_rel_err", identity_ok);
  rec.checks.emplace_back("hs_imaginary_part", imag_ok);
  rec.checks.emplace_back("hs_shift_invariance", shift_ok);
  rec.checks.emplace_back("hs_reconstruction", recon_ok);
  return rec;
}

ResultRecord run_gap_study(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "gap-study";
  echo_common(rec, cfg);
  const ModelParams p{cfg.beta, cfg.h};
  const GapStudy study =
      gap_study(p, cfg.n_values, static_cast<int>(cfg.seeds.size()),
                cfg.seeds.front(), cfg.restarts, effective_threads(cfg));
  rec.columns = {"n", "seed", "log_z", "sup_fht", "gap", "q_ea_argmax"};
  for (const auto& r : study.rows)
    rec.rows.push_back({double(r.n), double(r.seed), r.log_z_per_spin, r.sup_fht,
                        r.gap, r.q_ea_argmax});
  bool decreasing = true;
  for (std::size_t i = 1; i < study.mean_gap.size(); ++i)
    decreasing = decreasing && study.mean_gap[i] < study.mean_gap[i - 1];
  rec.checks.emplace_back("gap_trend_decreasing", decreasing);
  return rec;
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::set<std::string> known = {
      "rs-solve", "region-classify", "tap-run", "tap-conditioned", "hessian-scan",
      "bound-bvh", "exact-compare", "hs-verify", "gap-study", "sweep"};
  if (!known.count(command))
    throw std::invalid_argument("config: unknown command '" + command + "'");
  if (!(beta > 0.0)) throw std::invalid_argument("config: beta must be positive");
  if (h < 0.0) throw std::invalid_argument("config: h must be nonnegative");
  if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
  for (int n : n_values)
    if (n < 1) throw std::invalid_argument("config: n values must be positive");
  for (const auto& [name, tol] : tolerances)
    if (!(tol > 0.0))
      throw std::invalid_argument("config: tolerance '" + name + "' must be positive");
  if (command == "sweep" && axis.empty())
    throw std::invalid_argument("config: sweep requires axis");
}

double ExperimentConfig::tolerance(const std::string& name, double fallback) const {
  const auto it = tolerances.find(name);
  return it == tolerances.end() ? fallback : it->second;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "command") cfg.command = value;
  else if (key == "beta") cfg.beta = std::stod(value);
  else if (key == "h") cfg.h = std::stod(value);
  else if (key == "n") {
    cfg.n_values.clear();
    for (const auto& tok : split(value, ',')) cfg.n_values.push_back(std::stoi(tok));
  } else if (key == "seeds") cfg.seeds = parse_seeds(value);
  else if (key == "k_max") cfg.k_max = std::stoi(value);
  else if (key == "n_points") cfg.n_points = std::stoi(value);
  else if (key == "restarts") cfg.restarts = std::stoi(value);
  else if (key == "order") cfg.order = std::stoi(value);
  else if (key == "rho") cfg.rho = std::stod(value);
  else if (key == "eps") cfg.eps = std::stod(value);
  else if (key == "scan") {
    if (value != "cube" && value != "shell" && value != "shell-rejection")
      throw std::invalid_argument("config: scan must be cube, shell or shell-rejection");
    cfg.scan = value;
  } else if (key == "axis") cfg.axis = value;
  else if (key == "values") {
    cfg.values.clear();
    for (const auto& tok : split(value, ',')) cfg.values.push_back(std::stod(tok));
  } else if (key == "out") cfg.output_path = value;
  else if (key == "format") {
    if (value == "csv") cfg.format = OutputFormat::Csv;
    else if (value == "json") cfg.format = OutputFormat::Json;
    else throw std::invalid_argument("config: format must be csv or json");
  } else if (key == "threads") cfg.threads = std::stoi(value);
  else if (key == "assert") cfg.assert_checks = (value == "1" || value == "true");
  else if (key == "timings") cfg.timings = (value == "1" || value == "true");
  else if (key.rfind("tol.", 0) == 0) cfg.tolerances[key.substr(4)] = std::stod(value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key=value");
    apply_config_entry(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void ResultRecord::recompute_aggregates() {
  aggregates.clear();
  if (rows.empty()) return;
  const std::size_t ncols = columns.size();
  aggregates.resize(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    double mean = 0.0;
    double mn = rows[0][c], mx = rows[0][c];
    for (const auto& row : rows) {
      mean += row[c];
      mn = std::min(mn, row[c]);
      mx = std::max(mx, row[c]);
    }
    mean /= rows.size();
    double var = 0.0;
    for (const auto& row : rows) var += (row[c] - mean) * (row[c] - mean);
    var = rows.size() > 1 ? var / (rows.size() - 1) : 0.0;
    aggregates[c] = {mean, std::sqrt(var), mn, mx};
  }
}

bool ResultRecord::all_checks_pass() const {
  for (const auto& [name, ok] : checks)
    if (!ok) return false;
  return true;
}

ResultRecord run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ResultRecord rec;
  try {
    if (cfg.command == "rs-solve") rec = run_rs_solve(cfg);
    else if (cfg.command == "region-classify") rec = run_region_classify(cfg);
    else if (cfg.command == "tap-run") rec = run_tap(cfg);
    else if (cfg.command == "tap-conditioned") rec = run_tap_conditioned(cfg);
    else if (cfg.command == "hessian-scan") rec = run_hessian_scan(cfg);
    else if (cfg.command == "bound-bvh") rec = run_bound_bvh(cfg);
    else if (cfg.command == "exact-compare") rec = run_exact_compare(cfg);
    else if (cfg.command == "hs-verify") rec = run_hs_verify(cfg);
    else if (cfg.command == "gap-study") rec = run_gap_study(cfg);
    else throw std::invalid_argument("run_experiment: unsupported command " + cfg.command);
  } catch (const std::invalid_argument&) {
    throw;  // configuration errors keep their field message
  } catch (const std::exception& e) {
    throw std::runtime_error("experiment " + cfg.command + ": " + e.what());
  }
  rec.recompute_aggregates();
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<ResultRecord> sweep(const ExperimentConfig& cfg_template,
                                const std::string& axis,
                                const std::vector<double>& values) {
  std::vector<ResultRecord> recs;
  for (double v : values) {
    ExperimentConfig cfg = cfg_template;
    if (axis == "beta") cfg.beta = v;
    else if (axis == "h") cfg.h = v;
    else if (axis == "rho") cfg.rho = v;
    else throw std::invalid_argument("sweep: unsupported axis '" + axis + "'");
    recs.push_back(run_experiment(cfg));
  }
  return recs;
}

std::string to_csv(const ResultRecord& rec, bool timings) {
  std::ostringstream out;
  out << "# experiment=" << rec.experiment << '\n';
  for (const auto& [k, v] : rec.params) out << "# " << k << '=' << v << '\n';
  if (timings) out << "# wall_time_s=" << fmt(rec.wall_time_s) << '\n';
  for (std::size_t c = 0; c < rec.columns.size(); ++c)
    out << rec.columns[c] << (c + 1 < rec.columns.size() ? "," : "");
  out << '\n';
  for (const auto& row : rec.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << fmt(row[c]) << (c + 1 < row.size() ? "," : "");
    out << '\n';
  }
  for (std::size_t c = 0; c < rec.aggregates.size(); ++c) {
    out << "# aggregate," << rec.columns[c] << ",mean=" << fmt(rec.aggregates[c][0])
        << ",std=" << fmt(rec.aggregates[c][1]) << ",min=" << fmt(rec.aggregates[c][2])
        << ",max=" << fmt(rec.aggregates[c][3]) << '\n';
  }
  for (const auto& [name, ok] : rec.checks)
    out << "# check," << name << ',' << (ok ? "pass" : "fail") << '\n';
  return out.str();
}

std::string to_json_lines(const ResultRecord& rec, bool timings) {
  std::ostringstream out;
  nlohmann::ordered_json head;
  head["type"] = "params";
  head["experiment"] = rec.experiment;
  for (const auto& [k, v] : rec.params) head[k] = v;
  if (timings) head["wall_time_s"] = rec.wall_time_s;
  out << head.dump() << '\n';
  for (const auto& row : rec.rows) {
    nlohmann::ordered_json j;
    j["type"] = "row";
    for (std::size_t c = 0; c < rec.columns.size(); ++c) j[rec.columns[c]] = row[c];
    out << j.dump() << '\n';
  }
  for (std::size_t c = 0; c < rec.aggregates.size(); ++c) {
    nlohmann::ordered_json j;
    j["type"] = "aggregate";
    j["metric"] = rec.columns[c];
    j["mean"] = rec.aggregates[c][0];
    j["std"] = rec.aggregates[c][1];
    j["min"] = rec.aggregates[c][2];
    j["max"] = rec.aggregates[c][3];
    out << j.dump() << '\n';
  }
  for (const auto& [name, ok] : rec.checks) {
    nlohmann::ordered_json j;
    j["type"] = "check";
    j["name"] = name;
    j["pass"] = ok;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::string render(const std::vector<ResultRecord>& recs, const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& rec : recs)
    out += cfg.format == OutputFormat::Csv ? to_csv(rec, cfg.timings)
                                           : to_json_lines(rec, cfg.timings);
  return out;
}

bool emit(const std::vector<ResultRecord>& recs, const ExperimentConfig& cfg) {
  const std::string payload = render(recs, cfg);
  if (cfg.output_path.empty()) {
    std::cout << payload;
    return false;
  }
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot open " + cfg.output_path);
  out << payload;
  return true;
}

}  // namespace sk
