#include "sk/rs_scalars.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace sk {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kResidualTol = 1e-13;
constexpr int kMaxIters = 10000;

double tanh_sq_expectation(const ModelParams& p, double q, const QuadContext& ctx) {
  const double s = p.beta * std::sqrt(std::max(q, 0.0));
  return expect_field([](double u) {
    const double t = std::tanh(u);
    return t * t;
  }, s, p.h, ctx);
}

// sech(u)^k without overflow at large |u|
double sech_pow(double u, int k) {
  const double e = std::exp(-std::abs(u));
  const double s = 2.0 * e / (1.0 + e * e);
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= s;
  return out;
}

}  // namespace

void ModelParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("ModelParams: beta must be positive");
  if (!(h >= 0.0) || !std::isfinite(h))
    throw std::invalid_argument("ModelParams: h must be nonnegative");
}

void ModelParams::require_positive_field() const {
  validate();
  if (!(h > 0.0)) throw std::invalid_argument("ModelParams: h must be positive here");
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - kLog2;
}

RsSolution solve_q(const ModelParams& p, const QuadContext& ctx) {
  p.validate();
  RsSolution sol{};
  if (p.h == 0.0 && p.beta <= 1.0) {
    sol.q = 0.0;
    sol.residual = 0.0;
    sol.sk = sk_formula(p, 0.0, ctx);
    sol.at_value = p.beta * p.beta;  // cosh(0)^-4 = 1
    return sol;
  }

  auto map = [&](double q) { return tanh_sq_expectation(p, q, ctx); };

  // Damped fixed-point first.
  double q = (p.h > 0.0) ? std::tanh(p.h) * std::tanh(p.h) : 0.5;
  if (q <= 0.0) q = 0.5;
  double residual = std::numeric_limits<double>::infinity();
  int iters = 0;
  double prev_residual = residual;
  bool stalled = false;
  for (; iters < kMaxIters; ++iters) {
    const double t = map(q);
    residual = std::abs(t - q);
    if (residual <= kResidualTol) break;
    if (iters > 50 && residual > 0.9 * prev_residual) { stalled = true; break; }
    prev_residual = residual;
    q = 0.5 * q + 0.5 * t;
  }

  if (residual > kResidualTol) {
    // Bisection on f(q) = map(q) - q.  For h > 0, f(0+) > 0 and f(1) < 0;
    // for h = 0, beta > 1 the positive branch has the same bracket.
    double lo = 1e-14, hi = 1.0;
    double flo = map(lo) - lo;
    if (flo <= 0.0 && p.h > 0.0) lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double fm = map(mid) - mid;
      if (fm > 0.0) lo = mid; else hi = mid;
    }
    q = 0.5 * (lo + hi);
    residual = std::abs(map(q) - q);
    (void)stalled;
  }

  if (!(residual <= 1e-12)) {
    throw std::runtime_error("solve_q: fixed point not resolved, residual=" +
                             std::to_string(residual) + " after " +
                             std::to_string(iters) + " iterations");
  }

  sol.q = q;
  sol.residual = residual;
  sol.sk = sk_formula(p, q, ctx);
  const double s = p.beta * std::sqrt(q);
  sol.at_value = p.beta * p.beta *
                 expect_field([](double u) { return sech_pow(u, 4); }, s, p.h, ctx);
  return sol;
}

double sk_formula(const ModelParams& p, double q, const QuadContext& ctx) {
  const double s = p.beta * std::sqrt(std::max(q, 0.0));
  const double e = expect_field([](double u) { return log_cosh(u); }, s, p.h, ctx);
  return kLog2 + 0.25 * p.beta * p.beta * (1.0 - q) * (1.0 - q) + e;
}

std::pair<double, bool> at_condition(const ModelParams& p, const QuadContext& ctx) {
  const RsSolution sol = solve_q(p, ctx);
  return {sol.at_value, sol.at_value <= 1.0};
}

double psi_map(double t, const ModelParams& p, double q, const QuadContext& ctx) {
  if (t < 0.0 || t > q)
    throw std::domain_error("psi_map: t must lie in [0, q]");
  const double a_out = p.beta * std::sqrt(t);
  const double a_in = p.beta * std::sqrt(std::max(q - t, 0.0));
  // inner expectation over Z', squared, then outer over Z; the outer variable
  // enters the inner integrand only through its field value
  auto inner_sq = [&](double field) {
    const double inner =
        expect_field([](double u) { return std::tanh(u); }, a_in, field, ctx);
    return inner * inner;
  };
  return expect_field(inner_sq, a_out, p.h, ctx);
}

GammaRhoSeq gamma_rho_sequence(const ModelParams& p, int K, Gamma1Convention conv,
                               const QuadContext& ctx) {
  p.require_positive_field();
  if (K < 1 || K > 200) throw std::invalid_argument("gamma_rho_sequence: K must be in [1,200]");
  const RsSolution sol = solve_q(p, ctx);
  const double q = sol.q;

  GammaRhoSeq seq;
  seq.gammas.resize(K);
  seq.rhos.resize(K);
  seq.gamma_sq_partial.resize(K);
  seq.rho_gaps.resize(K);
  seq.gamma_sq_gaps.resize(K);

  const double scale = (conv == Gamma1Convention::Scaled) ? std::sqrt(q) : 1.0;
  const double gamma1 = expect_field([](double u) { return std::tanh(u); },
                                     p.beta * scale, p.h, ctx);
  seq.gammas[0] = gamma1;
  seq.rhos[0] = std::sqrt(q) * gamma1;
  seq.gamma_sq_partial[0] = gamma1 * gamma1;
  seq.rho_gaps[0] = q - seq.rhos[0];
  seq.gamma_sq_gaps[0] = q - seq.gamma_sq_partial[0];

  // Below this gap the direct difference q - psi(q - gap) is dominated by
  // rounding; the sequence is then continued with its exact asymptotic ratio
  // psi'(q), which is the stability value.
  constexpr double kLinearizeBelow = 1e-6;

  for (int k = 1; k < K; ++k) {
    const double gap_prev = seq.rho_gaps[k - 1];
    const double s_prev = seq.gamma_sq_gaps[k - 1];
    if (s_prev <= 0.0 || gap_prev <= 0.0) {
      throw std::runtime_error(
          "gamma_rho_sequence: q - Gamma^2 is nonpositive at k=" + std::to_string(k + 1) +
          " (sequence outside the admissible range)");
    }
    const double gap = (gap_prev > kLinearizeBelow)
                           ? q - psi_map(q - gap_prev, p, q, ctx)
                           : sol.at_value * gap_prev;
    if (gap <= 0.0)
      throw std::runtime_error("gamma_rho_sequence: overlap gap lost positivity at k=" +
                               std::to_string(k + 1));
    const double gamma = (s_prev - gap) / std::sqrt(s_prev);
    const double s = gap * (2.0 - gap / s_prev);
    seq.rhos[k] = q - gap;
    seq.gammas[k] = gamma;
    seq.gamma_sq_partial[k] = q - s;
    seq.rho_gaps[k] = gap;
    seq.gamma_sq_gaps[k] = s;
  }
  return seq;
}

double theta_fn(double rho) {
  if (rho < 0.0 || rho > 1.0) throw std::domain_error("theta_fn: rho must be in [0,1]");
  const double u = 1.0 - rho;
  if (u == 0.0) return 0.0;
  return 36.0 * u + 4.0 * std::sqrt(u) +
         std::pow(u, 0.25) * (4.0 + std::sqrt(12.0 * (std::abs(std::log(u)) + 2.0)));
}

double r_field(const ModelParams& p, double q) {
  p.require_positive_field();
  const double a = 2.0 * p.beta * std::sqrt(q);
  const double b = 2.0 * p.h;
  return (p.beta * p.beta * q * (1.0 - q) + weighted_exp_abs_gauss(a, b)) / p.h;
}

double rho_bar(const ModelParams& p, double q) {
  if (p.h <= 1.0) throw std::domain_error("rho_bar: requires h > 1");
  const double r = r_field(p, q);
  const double bracket = 1.0 - (1.0 + 1.0 / (p.h - 1.0)) * r;
  const double b2 = bracket * bracket;
  return (b2 < q) ? b2 : q * b2;
}

RegionReport classify_region(const ModelParams& p, const QuadContext& ctx) {
  p.require_positive_field();
  const RsSolution sol = solve_q(p, ctx);
  const double q = sol.q;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  RegionReport rep;
  rep.q = q;
  rep.at_value = sol.at_value;
  rep.in_at = sol.at_value <= 1.0;
  rep.in_d1 = p.beta < 1.0 / (1.0 + std::sqrt(q));
  rep.in_d3 = (p.h / p.beta > 2.0) && (p.beta * p.beta * (1.0 - q) <= 1.0) && (p.h >= 4.0);
  rep.r_bh = r_field(p, q);

  if (rep.in_d3 && p.h > 1.0) {
    rep.rho_bar = rho_bar(p, q);
    rep.theta_of_rho_bar = theta_fn(std::clamp(rep.rho_bar, 0.0, 1.0));
    rep.in_d4 = rep.rho_bar >= std::sqrt(0.75);
    rep.in_d2 = (rep.rho_bar <= q) && (p.beta * rep.theta_of_rho_bar < 1.0);
  } else {
    rep.rho_bar = nan;
    rep.theta_of_rho_bar = nan;
    rep.in_d4 = false;
    rep.in_d2 = false;
    rep.notes = rep.in_d3 ? "rho_bar undefined: h <= 1"
                          : "rho_bar undefined: outside the large-field domain";
  }

  const double hb = p.h / p.beta;
  rep.in_d_tilde2 = (12.0 * p.beta * std::exp(-hb * hb / 9.0) < 1.0) &&
                    (3.0 <= hb) && (hb <= p.beta * q / 10.0);
  rep.in_d = rep.in_d1 || (rep.in_d2 && rep.in_d3 && rep.in_d4);
  return rep;
}

double delta_bh(double rho, const ModelParams& p, double q, const QuadContext& ctx) {
  if (rho < 0.0 || rho > q) throw std::domain_error("delta_bh: rho must be in [0,q]");
  const double s = p.beta * std::sqrt(q);
  const double scale = std::sqrt(rho / q);
  return expect_field(
      [scale](double u) { return log_cosh(scale * u) - log_cosh(u); }, s, p.h, ctx);
}

double psi_rho(double rho, const ModelParams& p, double q, const QuadContext& ctx) {
  if (rho < 0.0 || rho > q) throw std::domain_error("psi_rho: rho must be in [0,q]");
  const double first = std::sqrt(rho) * p.h * (1.0 - std::sqrt(rho / q));
  const double second = 0.5 * p.beta * p.beta * (1.0 - q) * (q - rho);
  return first + second + delta_bh(rho, p, q, ctx);
}

double sup_psi_rho(const ModelParams& p, double q, double rho_max, const QuadContext& ctx) {
  if (rho_max <= 0.0) throw std::domain_error("sup_psi_rho: rho_max must be positive");
  const double hi = std::min(rho_max, q);
  const int grid_n = 2000;
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < grid_n; ++i) {
    const double rho = hi * i / grid_n;  // [0, rho_max)
    const double v = psi_rho(rho, p, q, ctx);
    if (v > best) { best = v; best_i = i; }
  }
  // golden-section refinement on the bracketing interval
  double a = hi * std::max(best_i - 1, 0) / grid_n;
  double b = hi * std::min(best_i + 1, grid_n - 1) / grid_n;
  const double gr = 0.61803398874989484820;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = psi_rho(x1, p, q, ctx), f2 = psi_rho(x2, p, q, ctx);
  while (b - a > 1e-8) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = psi_rho(x2, p, q, ctx);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = psi_rho(x1, p, q, ctx);
    }
  }
  return std::max({best, f1, f2});
}

std::pair<double, double> one_minus_q_bounds(const ModelParams& p, double q) {
  p.validate();
  const double a = 2.0 * p.beta * std::sqrt(std::max(q, 0.0));
  const double b = 2.0 * p.h;
  const double e2 = (a > 0.0) ? exp_abs_gauss(a, b) : std::exp(-b);
  double lower = e2;
  double upper = 4.0 * e2;
  if (q <= 0.0) return {lower, upper};  // degenerate q = 0

  const double eta = 0.05;
  const double bsq = p.beta * std::sqrt(q);
  if (p.h > 0.0 && p.h <= 2.0 * eta * p.beta * p.beta * q) {
    // large-field refinement, scaled form
    const double ratio = p.h / bsq;
    const double scale = std::exp(-0.5 * ratio * ratio) / std::sqrt(M_PI / 2.0);
    const double lo = 0.25 / std::sqrt(bsq * bsq * (1.0 + eta) * (1.0 + eta) + 1.0) * scale;
    const double hiv = 2.0 / (bsq * (1.0 - eta * eta)) * scale;
    lower = std::max(lower, lo);
    upper = std::min(upper, hiv);
  }
  if (p.h > 0.0 && p.h >= 2.0 * (1.0 + eta) * p.beta * p.beta * q) {
    // deep-field refinement: only the upper side; the displayed lower bound
    // fails at moderate beta*sqrt(q) (the source states it without proof)
    const double decay = std::exp(-2.0 * (p.h - p.beta * p.beta * q));
    const double tail = std::sqrt(2.0 / M_PI) / bsq *
                        std::exp(-0.5 * (2.0 * eta * bsq) * (2.0 * eta * bsq));
    upper = std::min(upper, (4.0 + tail * 2.0 / (1.0 + eta)) * decay);
  }
  return {lower, upper};
}

std::pair<double, double> f1_f2(const ModelParams& p, double q, double rho) {
  return {theta_fn(rho), 2.0 * p.beta - (p.beta * p.beta * (1.0 - q) + 1.0)};
}

}  // namespace sk
