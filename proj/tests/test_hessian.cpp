#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sk/eigs.hpp"
#include "sk/functionals.hpp"
#include "sk/hessian.hpp"
#include "sk/tap.hpp"

#include <cmath>
#include <sstream>

using namespace sk;

TEST_CASE("hessian of the functional") {
  const ModelParams p{0.4, 1.0};
  const RsSolution sol = solve_q(p);
  const double q = sol.q;

  SUBCASE("constant diagonal at the origin") {
    const DisorderSample d = sample_disorder(40, 2, p, q);
    const Eigen::MatrixXd h = hessian(Eigen::VectorXd::Zero(40), d, p, q);
    const Eigen::MatrixXd expected =
        p.beta * d.j_over_sqrt_n -
        (p.beta * p.beta * (1.0 - q) + 1.0) * Eigen::MatrixXd::Identity(40, 40);
    CHECK((h - expected).cwiseAbs().maxCoeff() <= 1e-14);
  }

  SUBCASE("matches finite differences of the functional") {
    const int n = 30;
    const DisorderSample d = sample_disorder(n, 3, p, q);
    const Eigen::VectorXd hvec = uniform_field(n, p.h);
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXd m = sample_cube_point(n, 71 + t, t) * 0.8;
      const Eigen::MatrixXd analytic = hessian(m, d, p, q);
      const Eigen::MatrixXd fd = oracle::fd_hessian(
          [&](const Eigen::VectorXd& x) { return psi_fn(x, d, p, hvec); }, m);
      CHECK((analytic - fd).cwiseAbs().maxCoeff() <= 1e-5);
    }
  }

  SUBCASE("diagonal dominance floor") {
    const DisorderSample d = sample_disorder(25, 4, p, q);
    const Eigen::VectorXd m = sample_cube_point(25, 5, 0);
    const Eigen::VectorXd a = a_coeffs(m, p, q);
    const double floor = p.beta * p.beta * (1.0 - q) + 1.0;
    for (int i = 0; i < 25; ++i) CHECK(1.0 / a[i] >= floor - 1e-14);
  }

  SUBCASE("boundary point rejected") {
    const DisorderSample d = sample_disorder(10, 6, p, q);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(10);
    m[0] = 1.0;
    CHECK_THROWS_AS(hessian(m, d, p, q), std::domain_error);
  }
}

TEST_CASE("similarity transform") {
  const ModelParams p{0.4, 1.0};
  const double q = solve_q(p).q;

  SUBCASE("constant coefficients at the origin") {
    const DisorderSample d = sample_disorder(30, 7, p, q);
    const Eigen::MatrixXd c = c_matrix(Eigen::VectorXd::Zero(30), d, p, q);
    const Eigen::MatrixXd expected =
        d.j_over_sqrt_n / (p.beta * p.beta * (1.0 - q) + 1.0);
    CHECK((c - expected).cwiseAbs().maxCoeff() <= 1e-14);
  }

  SUBCASE("coefficients below c0(1) <= 1") {
    const Eigen::VectorXd m = sample_cube_point(50, 8, 0);
    const Eigen::VectorXd a = a_coeffs(m, p, q);
    CHECK(a.maxCoeff() <= c0(1.0, p, q) + 1e-15);
    CHECK(c0(1.0, p, q) <= 1.0);
  }

  SUBCASE("negativity criterion matches between the two routes") {
    // beta spans both signs of lambda_max(H) at n = 120
    for (double beta : {0.4, 0.9, 1.6}) {
      const ModelParams pp{beta, 1.0};
      const double qq = solve_q(pp).q;
      const DisorderSample d = sample_disorder(120, 9, pp, qq);
      for (int t = 0; t < 10; ++t) {
        const Eigen::VectorXd m = sample_cube_point(120, 100 + t, t) * 0.98;
        const double lh = extreme_eigenvalues(hessian(m, d, pp, qq), 1e-10).lambda_max;
        const double lc = extreme_eigenvalues(c_matrix(m, d, pp, qq), 1e-10).lambda_max;
        CHECK((lh < 0.0) == (pp.beta * lc < 1.0));
      }
    }
  }
}

TEST_CASE("c0 scaling function") {
  const ModelParams p{0.7, 1.0};
  const double q = solve_q(p).q;
  CHECK(c0(1.0, p, q) ==
        doctest::Approx(1.0 / (p.beta * p.beta * (1.0 - q) + 1.0)).epsilon(1e-15));
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double y = i / 20.0;
    const double v = c0(y, p, q);
    CHECK(v > prev);
    CHECK(v <= y + 1e-15);
    prev = v;
  }
  CHECK_THROWS_AS(c0(0.0, p, q), std::domain_error);
  CHECK_THROWS_AS(c0(1.5, p, q), std::domain_error);
}

TEST_CASE("threshold decomposition") {
  const ModelParams p{0.4, 1.0};
  const double q = solve_q(p).q;
  const int n = 80;
  const DisorderSample d = sample_disorder(n, 11, p, q);

  SUBCASE("parts sum to the whole") {
    const Eigen::VectorXd m = sample_shell_smooth(n, 0.7, 12, 0);
    const CDecomposition dec = decompose_c(m, d, p, q, 0.5, 0.1);
    const Eigen::MatrixXd c = c_matrix(m, d, p, q);
    CHECK((dec.under + dec.circ + dec.over - c).cwiseAbs().maxCoeff() <= 1e-14);

    const double norm_c = spectral_radius(c, 1e-9);
    const double tri = spectral_radius(dec.under, 1e-9) +
                       spectral_radius(dec.circ, 1e-9) +
                       spectral_radius(dec.over, 1e-9);
    CHECK(norm_c <= tri + 1e-9);
  }

  SUBCASE("all sites above both thresholds collapses the split") {
    const Eigen::VectorXd m = Eigen::VectorXd::Constant(n, 0.3);  // 1-m^2 = 0.91
    const CDecomposition dec = decompose_c(m, d, p, q, 0.5, 0.1);
    CHECK(static_cast<int>(dec.lambda.size()) == n);
    CHECK(dec.circ.cwiseAbs().maxCoeff() == 0.0);
    CHECK(dec.under.cwiseAbs().maxCoeff() == 0.0);
  }

  CHECK_THROWS_AS(decompose_c(Eigen::VectorXd::Zero(n), d, p, q, 0.1, 0.5),
                  std::invalid_argument);
}

TEST_CASE("variance-profile bound") {
  const ModelParams p{0.4, 1.0};
  const double q = solve_q(p).q;
  const int n = 200;

  SUBCASE("profile quantities on shell points") {
    const double rho = 0.6, eps = 0.5;
    for (int t = 0; t < 10; ++t) {
      const Eigen::VectorXd m = sample_shell_smooth(n, rho, 21 + t, t);
      const double rho_minus = rho - rho * (1.0 - rho) * eps;
      const double rho_plus = rho + rho * (1.0 - rho) * eps;
      CHECK(sigma_star_profile(m, p, q) <= c0(1.0, p, q) / std::sqrt(double(n)) + 1e-15);
      CHECK(sigma_profile(m, p, q) <=
            std::sqrt(c0(1.0, p, q) * c0(1.0 - rho_minus, p, q)) + 1e-15);
      // the mean coefficient sandwich on the shell, pointwise form
      const Eigen::VectorXd a = a_coeffs(m, p, q);
      CHECK(a.mean() <= c0(1.0 - rho_minus, p, q) + 1e-15);
      CHECK(a.mean() >= (1.0 - rho_plus) * c0(1.0, p, q) - 1e-15);
      CHECK(a.maxCoeff() <= c0(1.0, p, q) + 1e-15);
    }
  }

  SUBCASE("norm below the mean bound on most draws") {
    const Eigen::VectorXd m = sample_shell_smooth(n, 0.6, 33, 0);
    const double bound = bvh_bound(m, p, q, 0.5);
    int ok = 0;
    for (int s = 0; s < 10; ++s) {
      const DisorderSample d = sample_disorder(n, 400 + s, p, q);
      if (spectral_radius(c_matrix(m, d, p, q), 1e-8) <= bound) ++ok;
    }
    CHECK(ok >= 9);
  }

  SUBCASE("tamed profile bound stays finite and dominated") {
    const Eigen::VectorXd m = sample_shell_smooth(n, 0.9, 35, 0);
    const double full = bvh_bound(m, p, q, 0.5);
    const double tamed = bvh_bound_tamed(m, p, q, 0.3, 0.05, 0.5);
    CHECK(std::isfinite(tamed));
    CHECK(tamed > 0.0);
    CHECK(full > 0.0);
  }
}

TEST_CASE("assembled shell bound") {
  const ModelParams p{0.4, 1.0};
  const double q = solve_q(p).q;
  double prev = 1e300;
  for (int i = 0; i <= 12; ++i) {
    const double rho = 0.87 + i * 0.01;
    const double eps = 1.0;
    const double rho_minus = rho - rho * (1.0 - rho) * eps;
    const double theta = std::sqrt(1.0 - rho_minus);
    const double theta_star = (1.0 - rho_minus) * (1.0 - rho_minus);
    const double eps_tilde = std::pow(1.0 - rho_minus, 4.0);
    const double r = shell_bound_r(rho, eps, eps_tilde, theta, theta_star, p, q, 1000);
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
    CHECK(r < prev);  // decreasing in rho, matching the monotone f1
    prev = r;
  }
}

TEST_CASE("negativity scan in the high-temperature half plane") {
  const ModelParams p{0.4, 1.0};
  const RsSolution sol = solve_q(p);
  const DisorderSample d = sample_disorder(300, 17, p, sol.q);
  const auto reports =
      negativity_scan(d, p, sol.q, ScanSet::Cube, 0.0, 0.5, 25, 2027);
  REQUIRE(reports.size() == 26);  // sampled points plus the TAP iterate
  for (const auto& r : reports) {
    CHECK(r.hessian_negative);
    CHECK(r.sign_equivalent);
    CHECK(r.lambda_max_h <= r.f2_bound + 1e-12);
  }
  // the appended iterate sits on the overlap shell
  CHECK(std::abs(reports.back().q_ea_point - sol.q) < 0.1);

  SUBCASE("origin ties the spectra together") {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(300);
    const double lj = extreme_eigenvalues(d.j_over_sqrt_n, 1e-10).lambda_max;
    const double lh = extreme_eigenvalues(hessian(zero, d, p, sol.q), 1e-10).lambda_max;
    CHECK(std::abs(lh - (p.beta * lj - (p.beta * p.beta * (1.0 - sol.q) + 1.0))) <=
          1e-8);
  }

  SUBCASE("csv export") {
    const std::string csv = scan_csv(reports, "d1=1;at=1");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          "point_id,q_ea,lambda_max_h,lambda_max_c,f2_bound,bvh_bound,region_flags");
  }
}

TEST_CASE("negativity on high-overlap shells at strong field") {
  // a point outside the half-plane where the shell criterion applies
  const ModelParams p{1.7, 12.0};
  const RsSolution sol = solve_q(p);
  REQUIRE(sol.at_value <= 1.0);
  const double rho = 1.0 - 1e-6;
  REQUIRE(rho <= sol.q);
  REQUIRE(p.beta * theta_fn(rho) < 1.0);
  const DisorderSample d = sample_disorder(300, 19, p, sol.q);
  const auto reports =
      negativity_scan(d, p, sol.q, ScanSet::ShellSmooth, rho, 0.5, 10, 4099);
  for (const auto& r : reports) {
    CHECK(r.hessian_negative);
    CHECK(r.sign_equivalent);
  }
}

TEST_CASE("shell samplers") {
  SUBCASE("smooth profile hits the target overlap in both regimes") {
    for (double rho : {0.1, 0.5, 0.9, 0.99, 0.999999}) {
      const Eigen::VectorXd m = sample_shell_smooth(500, rho, 23, 0);
      CHECK(std::abs(q_ea(m) - rho) <= 1e-10);
      CHECK((m.array().abs() < 1.0).all());
    }
  }
  SUBCASE("rejection sampling works at low overlap and reports saturation") {
    const Eigen::VectorXd m = sample_shell_rejection(200, 0.02, 29, 0);
    CHECK(q_ea(m) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK_THROWS_AS(sample_shell_rejection(300, 0.9, 31, 0), std::invalid_argument);
  }
  SUBCASE("geman consistency of the transformed spectrum") {
    const ModelParams p{0.4, 1.0};
    const double q = solve_q(p).q;
    const DisorderSample d = sample_disorder(2000, 37, p, q);
    const Eigen::VectorXd s =
        Eigen::VectorXd::Constant(2000, std::sqrt(c0(1.0, p, q)));
    auto apply_c = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      y.noalias() = d.j_over_sqrt_n * s.cwiseProduct(x);
      y = s.cwiseProduct(y);
    };
    const double lc = extreme_eigenvalues(apply_c, 2000, 1e-8).lambda_max;
    CHECK(std::abs(lc - 2.0 * c0(1.0, p, q)) <= 0.1 * c0(1.0, p, q));
  }
}
