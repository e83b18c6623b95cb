#include "sk/tap.hpp"

#include <sstream>
#include <stdexcept>

namespace sk {

IterateTrace iterate_tap(const DisorderSample& d, const ModelParams& p, double q, int K) {
  p.require_positive_field();
  if (K < 2) throw std::invalid_argument("iterate_tap: K must be >= 2");
  const int n = d.n;
  const double onsager = p.beta * p.beta * (1.0 - q);

  IterateTrace t;
  t.iterates.reserve(K + 1);
  t.iterates.push_back(Eigen::VectorXd::Zero(n));
  t.iterates.push_back(Eigen::VectorXd::Constant(n, std::sqrt(q)));
  // fields u^(k) with m^(k) = tanh(u^(k)); they stand in for atanh(m^(k))
  // in the gradient, which stays exact when tanh saturates at strong fields
  std::vector<Eigen::VectorXd> fields;
  fields.reserve(K + 1);
  fields.push_back(Eigen::VectorXd::Zero(n));
  fields.push_back(Eigen::VectorXd::Constant(n, std::atanh(std::sqrt(q))));
  for (int k = 1; k < K; ++k) {
    const Eigen::VectorXd field =
        (p.beta * (d.j_over_sqrt_n * t.iterates[k]) - onsager * t.iterates[k - 1])
            .array() + p.h;
    fields.push_back(field);
    t.iterates.push_back(field.array().tanh().matrix());
  }

  t.norms_sq.resize(K + 1);
  t.grad_norms.resize(K + 1);
  t.fht_values.resize(K + 1);
  t.ftap_values.resize(K + 1);
  t.increments.resize(K + 1);
  t.overlaps.resize(K + 1, K + 1);
  t.increments[0] = 0.0;
  for (int k = 0; k <= K; ++k) {
    const Eigen::VectorXd& m = t.iterates[k];
    t.norms_sq[k] = m.squaredNorm() / n;
    const Eigen::VectorXd grad =
        (p.beta * (d.a_matrix * m)).array() + p.h - fields[k].array();
    t.grad_norms[k] = grad.norm() / std::sqrt(static_cast<double>(n));
    t.fht_values[k] = f_ht(m, d, p, q);
    t.ftap_values[k] = f_tap(m, d, p, q);
    if (k >= 1) t.increments[k] = (m - t.iterates[k - 1]).squaredNorm() / n;
    for (int j = 0; j <= k; ++j)
      t.overlaps(k, j) = t.overlaps(j, k) = m.dot(t.iterates[j]) / n;
  }
  return t;
}

std::vector<double> cauchy_increments(const IterateTrace& t) {
  std::vector<double> incr;
  for (std::size_t k = 0; k + 1 < t.iterates.size(); ++k)
    incr.push_back((t.iterates[k + 1] - t.iterates[k]).squaredNorm() / t.iterates[k].size());
  return incr;
}

std::vector<double> fht_at_iterates(const IterateTrace& t, const DisorderSample& d,
                                    const ModelParams& p, double q) {
  std::vector<double> out;
  out.reserve(t.iterates.size());
  for (const auto& m : t.iterates) out.push_back(f_ht(m, d, p, q));
  return out;
}

OverlapReport overlap_diagnostics(const IterateTrace& t, const GammaRhoSeq& seq) {
  const int K = static_cast<int>(t.iterates.size()) - 1;
  OverlapReport rep;
  rep.deviation = Eigen::MatrixXd::Zero(K + 1, K + 1);
  double sum = 0.0;
  int count = 0;
  for (int k = 2; k <= K; ++k) {
    for (int j = 1; j < k && j <= seq.rhos.size(); ++j) {
      const double dev = std::abs(t.overlaps(k, j) - seq.rhos[j - 1]);
      rep.deviation(k, j) = dev;
      rep.max_deviation = std::max(rep.max_deviation, dev);
      sum += dev;
      ++count;
    }
  }
  rep.mean_deviation = count > 0 ? sum / count : 0.0;
  return rep;
}

Gamma1Adjudication adjudicate_gamma1(const IterateTrace& t, const GammaRhoSeq& scaled,
                                     const GammaRhoSeq& literal) {
  const double ds = overlap_diagnostics(t, scaled).mean_deviation;
  const double dl = overlap_diagnostics(t, literal).mean_deviation;
  return {ds, dl, ds <= dl};
}

namespace {

// Gram-Schmidt in the <.,.> = (1/N)(.,.) inner product, two passes.
Eigen::VectorXd orthonormalize(const Eigen::VectorXd& v,
                               const std::vector<Eigen::VectorXd>& basis, int n) {
  Eigen::VectorXd w = v;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& phi : basis) w -= (w.dot(phi) / n) * phi;
  const double norm = w.norm() / std::sqrt(static_cast<double>(n));
  if (norm < 1e-10)
    throw std::runtime_error("conditioned_iterate: Gram-Schmidt residual below 1e-10 "
                             "(linearly dependent direction)");
  return w / norm;
}

}  // namespace

ConditionedState conditioned_iterate(const DisorderSample& d, const ModelParams& p,
                                     double q, const GammaRhoSeq& seq, int K) {
  p.require_positive_field();
  if (K < 1 || K > 30) throw std::invalid_argument("conditioned_iterate: K must be in [1,30]");
  if (seq.gammas.size() < K)
    throw std::invalid_argument("conditioned_iterate: scalar sequence shorter than K");
  const int n = d.n;

  ConditionedState st;
  st.g_current = d.g;
  st.phis.reserve(K);
  st.zetas.reserve(K);
  st.hbars.reserve(K);
  st.mbars.reserve(K);
  st.mbars.push_back(Eigen::VectorXd::Constant(n, std::sqrt(q)));
  st.hbars.push_back(Eigen::VectorXd::Constant(n, std::atanh(std::sqrt(q))));
  st.phis.push_back(Eigen::VectorXd::Ones(n));  // mbar^(1) normalized in ||.||_{2,N}

  for (int k = 1; k < K; ++k) {
    const Eigen::VectorXd phi = st.phis[k - 1];  // by value: phis grows below
    const Eigen::VectorXd xi = st.g_current * phi;
    const Eigen::VectorXd eta = st.g_current.transpose() * phi;
    const Eigen::VectorXd zeta = (xi + eta) / std::sqrt(2.0);
    st.zetas.push_back(zeta);

    // q - Gamma^2_{k-1} from the gap representation (equals q at k=1)
    const double root = (k >= 2) ? seq.gamma_sq_gaps[k - 2] : q;
    if (root <= 0.0)
      throw std::runtime_error("conditioned_iterate: q - Gamma^2 nonpositive at k=" +
                               std::to_string(k));
    Eigen::VectorXd hbar = Eigen::VectorXd::Constant(n, p.h);
    for (int s = 1; s <= k - 1; ++s) hbar += p.beta * seq.gammas[s - 1] * st.zetas[s - 1];
    hbar += p.beta * std::sqrt(root) * zeta;
    st.hbars.push_back(hbar);
    st.mbars.push_back(hbar.array().tanh().matrix());
    st.phis.push_back(orthonormalize(st.mbars.back(), st.phis, n));

    // rank-one deflation, outer products scaled by 1/N
    const double proj = phi.dot(xi) / n;
    st.g_current -= (xi * phi.transpose() + phi * eta.transpose() -
                     proj * (phi * phi.transpose())) / n;
  }
  return st;
}

std::string trace_csv(const IterateTrace& t) {
  std::ostringstream out;
  out.precision(17);
  out << "k,norm_sq,grad_norm,fht,ftap,q_ea,increment\n";
  for (std::size_t k = 0; k < t.iterates.size(); ++k) {
    out << k << ',' << t.norms_sq[k] << ',' << t.grad_norms[k] << ','
        << t.fht_values[k] << ',' << t.ftap_values[k] << ',' << t.norms_sq[k] << ','
        << t.increments[k] << '\n';
  }
  return out.str();
}

}  // namespace sk
