#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "betamix/bounds.hpp"
#include "betamix/error.hpp"

using namespace betamix;

// Reference values in this file were computed once with 40-digit mpmath
// arithmetic from the closed forms and frozen here.

namespace {

BoundParams deviation_params(std::size_t n, std::size_t m) {
  BoundParams p;
  p.epsilon = 0.5;
  p.c = 2.0;
  p.gamma = 2.0;
  p.gamma_prime = 2.0;
  p.B = 1.0;
  p.n = n;
  p.m = m;
  return p;
}

BoundParams weak_params() {
  BoundParams p;
  p.n = 1000;
  p.m = 5;
  p.c = 9.0;
  p.lambda = 1.5;
  p.V = 2;
  p.B = 1.0;
  return p;
}

BoundParams subexp_params(std::size_t n, double gamma) {
  BoundParams p;
  p.n = n;
  p.lambda = 2.0;
  p.B = 1.0;
  p.V = 1;
  p.C = 0.1;
  p.mixing = MixingRate{RateModel::Subexponential, 1.0, 0.7, gamma};
  return p;
}

BoundParams subpoly_params(std::size_t n, double gamma) {
  BoundParams p = subexp_params(n, gamma);
  p.mixing = MixingRate{RateModel::Subpolynomial, 1.0, 0.0, gamma};
  return p;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("u constants") {
  const auto u = u_constants(2.0, 2.0);
  CHECK(u.u1 == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(u.u2 == doctest::Approx(0.125).epsilon(1e-15));
  double prev1 = 1.0, prev2 = 0.0;
  for (double c : {2.0, 10.0, 1e3, 1e6}) {
    const auto v = u_constants(c, c);
    CHECK(v.u1 < prev1);
    CHECK(v.u2 > prev2);
    CHECK(v.u2 < 1.0);
    prev1 = v.u1;
    prev2 = v.u2;
  }
  const auto lim = u_constants(1e6, 1e6);
  CHECK(lim.u1 < 1e-5);
  CHECK(lim.u2 > 1.0 - 1e-5);
  CHECK_THROWS_AS(u_constants(1.0, 2.0), DomainError);
}

TEST_CASE("independent deviation bound") {
  const BoundParams p = deviation_params(1000, 1);
  const EntropyEstimate zero = finite_family_estimate(1);
  CHECK(indep_deviation_bound(p, zero, 1000, 0.5) ==
        doctest::Approx(6.549508522363250697e-7).epsilon(1e-12));
  // Threshold (Bc/2) sqrt(gamma/size) = sqrt(2/1000).
  CHECK(indep_deviation_bound(p, zero, 1000, 0.04) == 1.0);
  double prev = INFINITY;
  const EntropyEstimate ss = sauer_shelah_estimate(1, 1.0);
  for (double t = 0.1; t <= 0.5; t += 0.05) {
    const double v = indep_deviation_bound(p, ss, 1000, t);
    CHECK(v <= prev);
    prev = v;
  }
  BoundParams bad = p;
  bad.epsilon = 1.0;
  CHECK_THROWS_AS(indep_deviation_bound(bad, zero, 10, 0.5), DomainError);
}

TEST_CASE("beta deviation bound") {
  const EntropyEstimate zero = finite_family_estimate(1);
  SUBCASE("m = 1, beta = 0 recovers the clipped independent bound") {
    const BoundParams p = deviation_params(800, 1);
    for (double t : {0.05, 0.2, 0.5, 1.0, 1.9}) {
      CHECK(beta_deviation_bound(p, zero, t, 0.0) == std::min(1.0, indep_deviation_bound(p, zero, 800, t)));
    }
  }
  SUBCASE("zero beyond 2B") {
    BoundParams p = deviation_params(800, 4);
    p.B = 0.5;
    CHECK(beta_deviation_bound(p, zero, 1.01, 0.0) == 0.0);
    CHECK(beta_deviation_bound(p, zero, 0.99, 0.0) > 0.0);
  }
  SUBCASE("mixing envelope stands in for beta") {
    BoundParams p = deviation_params(1000, 10);
    p.mixing = MixingRate{RateModel::Subexponential, 1.0, 0.7, 1.0};
    const double v = beta_deviation_bound(p, zero, 0.5);
    CHECK(std::isfinite(v));
    CHECK(v == beta_deviation_bound(p, zero, 0.5, std::exp(-7.0)));
    p.mixing.reset();
    CHECK_THROWS_AS(beta_deviation_bound(p, zero, 0.5), DomainError);
  }
}

TEST_CASE("proof constants") {
  const auto pc = proof_constants(2.0, 1.5);
  CHECK(pc.G0 == 42.0);
  CHECK(pc.G1 == doctest::Approx(0.025).epsilon(1e-14));
  CHECK(pc.b == doctest::Approx(0.004930606281957633309).epsilon(1e-12));
  for (double c : {1.5, 2.0, 9.0, 50.0})
    for (double l : {1.1, 1.5, 3.0}) CHECK(proof_constants(c, l).b > 0.0);
}

TEST_CASE("t0 threshold") {
  CHECK(t0_threshold(2.0, 1.5, 100) == doctest::Approx(0.06024184114977141490).epsilon(1e-12));
  CHECK(t0_threshold(2.0, 1.5, 100) ==
        doctest::Approx((-0.5 + std::sqrt(0.25 + 6.0 * 2.25 / 100.0)) / 2.0).epsilon(1e-12));
  CHECK(t0_threshold(2.0, 1.5, 1000000000) == doctest::Approx(6.749999908875e-9).epsilon(1e-9));
  CHECK(t0_threshold(2.0, 1.5, 1000000000) < 1e-4);
  double prev = INFINITY;
  for (std::size_t s : {10, 100, 1000, 10000}) {
    const double v = t0_threshold(2.0, 1.5, s);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("weak-error constants and bound") {
  CHECK(theta0(1.5, 2.0) == doctest::Approx(87616.0 / 27.0).epsilon(1e-12));
  CHECK(theta0(1.5, 9.0) == doctest::Approx(602.0833333333333).epsilon(1e-12));
  CHECK(theta1(9.0, 5) == doctest::Approx(8.748304912379624056).epsilon(1e-12));
  CHECK(theta2(9.0, 1000, 5) == doctest::Approx(8.086480912864987120).epsilon(1e-12));

  SUBCASE("worked example") {
    const BoundParams p = weak_params();
    CHECK(std::exp((81.0 - 71.0) / 8.0) == doctest::Approx(3.490342957461841376).epsilon(1e-14));
    CHECK_NOTHROW(check_weak_error_hypotheses(9.0, 1.5, 2, 1000, 5));
    const auto w = weak_error_bound(p, 0.0, 0.0);
    CHECK(w.variance_term == doctest::Approx(90.61852097566559494).epsilon(1e-12));
    CHECK(w.total == w.variance_term);
    CHECK(w.beta_error_term == 0.0);
    CHECK(w.scaled_bias_term == 0.0);
    const auto v = weak_error_bound(p, 0.1, 1e-6);
    CHECK(v.scaled_bias_term == doctest::Approx(0.15));
    CHECK(v.beta_error_term == doctest::Approx(16.0 * 2.5 * 1000 * 1e-6));
    CHECK(v.total == doctest::Approx(v.variance_term + v.beta_error_term + v.scaled_bias_term));
  }
  SUBCASE("hypothesis violations quote the inequality") {
    BoundParams p = weak_params();
    p.c = 2.0;
    p.lambda = 2.0;
    try {
      weak_error_bound(p, 0.0, 0.0);
      FAIL("expected a hypothesis violation");
    } catch (const HypothesisViolation& e) {
      CHECK(std::string(e.what()).find("lambda <= (3 + sqrt(1 + 8c))/4") != std::string::npos);
    }
    p = weak_params();
    p.c = 10.0;
    p.V = 1;
    p.m = 1;
    try {
      weak_error_bound(p, 0.0, 0.0);
      FAIL("expected a hypothesis violation");
    } catch (const HypothesisViolation& e) {
      CHECK(std::string(e.what()).find("floor(n/m) >= exp((c^2 - 71)/(4V))") != std::string::npos);
    }
  }
  SUBCASE("tail bound") {
    CHECK(weak_error_tail_bound(9.0, 1.5, 2, 1000, 5, 2.6, 0.0) == 0.0);
    CHECK(weak_error_tail_bound(9.0, 1.5, 2, 1000, 5, 1e-6, 0.0) == 1.0);
    const double v = weak_error_tail_bound(9.0, 1.5, 2, 1000, 5, 2.4, 0.0);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("statistical error curve") {
  const std::size_t n = 100000;
  const BoundParams p = subexp_params(n, 1.0);
  std::vector<double> grid;
  for (double x = 2.0; x <= 400.0; x += 1.0) grid.push_back(x);
  const ErrorCurve c = statistical_error_curve(p, grid, 0.1);
  const double alpha = variance_slope(p, 0.1);
  const double expected_x = std::pow(2.0, 2.0) * std::log(static_cast<double>(n)) / 0.7;
  CHECK(c.analytic_x == doctest::Approx(expected_x).epsilon(1e-13));
  CHECK(c.closed_form == doctest::Approx(expected_x * alpha + 1.0 / n).epsilon(1e-12));
  CHECK(c.grid_value <= c.analytic_value + alpha * 1.0);
  CHECK(alpha == doctest::Approx(2 * 0.1 * (0.5 * std::log(71.0) + std::log(1e5)) / 1e5).epsilon(1e-13));

  const ErrorCurve lim = statistical_error_curve(subexp_params(n, 1e6), grid, 0.1);
  CHECK(lim.analytic_x == doctest::Approx(2.0).epsilon(1e-4));

  const std::vector<double> outside{0.5, 1e9};
  CHECK_THROWS_AS(statistical_error_curve(p, outside, 0.1), DomainError);
  CHECK_THROWS_AS(statistical_error_curve(subpoly_params(n, 2.0), grid, 0.1), DomainError);
}

TEST_CASE("subexponential rate") {
  std::vector<double> ns, rates, ref;
  for (double n : {1e3, 1e4, 1e5, 1e6}) {
    ns.push_back(n);
    rates.push_back(subexp_rate(subexp_params(static_cast<std::size_t>(n), 1.0)));
    ref.push_back(std::pow(std::log(n), 2.0) / n);
  }
  CHECK(slope(ns, rates) == doctest::Approx(slope(ns, ref)).epsilon(0.1));

  // Affine in B^2 V: the part not multiplying B^2 V is C a block / n.
  BoundParams p = subexp_params(10000, 2.0);
  const double block = std::pow(2.0 * std::log(1e4) / 0.7, 0.5);
  const double fixed = 0.1 * 1.0 * block / 1e4;
  const double r1 = subexp_rate(p);
  p.V = 3;
  const double r3 = subexp_rate(p);
  p.V = 1;
  p.B = 2.0;
  const double rb = subexp_rate(p);
  CHECK(r3 - fixed == doctest::Approx(3.0 * (r1 - fixed)).epsilon(1e-12));
  CHECK(rb - fixed == doctest::Approx(4.0 * (r1 - fixed)).epsilon(1e-12));

  // gamma -> infinity: block length -> 1, leaving the independent log n / n shape.
  const BoundParams big = subexp_params(100000, 1e6);
  const double n = 1e5;
  const double indep = 0.1 / n * (1.0 * (1.0 + std::log(n)) + 1.0);
  CHECK(subexp_rate(big) == doctest::Approx(indep).epsilon(1e-4));

  BoundParams no_c = subexp_params(1000, 1.0);
  no_c.C.reset();
  CHECK_THROWS_AS(subexp_rate(no_c), DomainError);
  BoundParams bad_lambda = subexp_params(1000, 1.0);
  bad_lambda.lambda = 3.0;
  CHECK_THROWS_AS(subexp_rate(bad_lambda), HypothesisViolation);
  CHECK(rate_lambda_limit() == doctest::Approx((3.0 + std::sqrt(1.0 + 8.0 * std::sqrt(71.0))) / 4.0));
}

TEST_CASE("subpolynomial rate") {
  for (double n : {1e3, 1e4, 1e5, 1e6}) {
    const auto t = subpoly_tradeoff(subpoly_params(static_cast<std::size_t>(n), 3.0), 0.1);
    CHECK(t.x == std::ceil(std::sqrt(n)));
    const double ratio = t.variance_part / t.mixing_part;
    CHECK(ratio >= 0.1);
    CHECK(ratio <= 10.0);
    const double order = std::pow(n, -0.5);
    CHECK(t.mixing_part / order == doctest::Approx(1.0).epsilon(0.05));
  }
  // Doubling n: factor 2^{-(g-1)/(g+1)} once the log factor is divided out.
  const double n = 1e4;
  auto spread = [](double m) { return (1.0 + std::log(m)) + 1.0; };
  const double r1 = subpoly_rate(subpoly_params(10000, 3.0));
  const double r2 = subpoly_rate(subpoly_params(20000, 3.0));
  CHECK((r2 / spread(2 * n)) / (r1 / spread(n)) == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-12));
  // gamma -> infinity: exponent -> 1, the independent-case shape.
  const double rl = subpoly_rate(subpoly_params(10000, 1e6));
  CHECK(rl == doctest::Approx(0.1 / n * spread(n)).epsilon(1e-4));
  CHECK_THROWS_AS(subpoly_rate(subpoly_params(1000, 0.5)), DomainError);
}
