#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "betamix/error.hpp"
#include "betamix/regression.hpp"
#include "betamix/simulate.hpp"

using namespace betamix;

namespace {

// States 0..S-1 at x = s; y = phi(x) exactly unless noise is given.
Dataset make_data(const std::vector<std::size_t>& states, const std::vector<double>& phi,
                  const std::vector<double>& noise = {}) {
  Dataset d;
  for (std::size_t s = 0; s < phi.size(); ++s) d.support.push_back(static_cast<double>(s));
  d.states = states;
  for (std::size_t k = 0; k < states.size(); ++k) {
    d.x.push_back(static_cast<double>(states[k]));
    d.y.push_back(phi[states[k]] + (noise.empty() ? 0.0 : noise[k]));
  }
  d.truth = Matrix{phi};
  d.marginals = Matrix(states.size(), std::vector<double>(phi.size(), 1.0 / phi.size()));
  return d;
}

GeneratorSpec mdep_spec(std::uint64_t seed) {
  GeneratorSpec spec;
  spec.kind = GeneratorSpec::Kind::MDependent;
  spec.dependence_lag = 2;
  spec.innovation = FinitePmf::over_indices({0.5, 0.5});
  // Phi(x) = 0.2 + 0.1 x on states {0, 1, 2}; lies in the span of {1, x}.
  spec.phi = {{0.2, 0.3, 0.4}};
  spec.noise_values = {-0.3, 0.3};
  spec.noise_probs = {0.5, 0.5};
  spec.response_bound = 1.0;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("truncate") {
  CHECK(truncate(0.5, 1.0) == 0.5);
  CHECK(truncate(2.0, 1.0) == 1.0);
  CHECK(truncate(-2.0, 1.0) == -1.0);
  for (double v : {-3.0, -0.2, 0.0, 0.7, 9.0}) CHECK(truncate(truncate(v, 0.5), 0.5) == truncate(v, 0.5));
}

TEST_CASE("empirical and average means") {
  const Dataset d = make_data({0, 1, 1, 0, 1}, {0.0, 1.0});
  CHECK(average_mean(d, [](std::size_t, double) { return 0.7; }) == doctest::Approx(0.7).epsilon(1e-15));
  const std::vector<double> sevens(4, 0.7);
  CHECK(empirical_mean(sevens) == doctest::Approx(0.7).epsilon(1e-15));
  // Uniform binary marginals, identity function.
  CHECK(average_mean(d, [](std::size_t, double x) { return x; }) == 0.5);

  SUBCASE("Markov marginals by propagation") {
    const oracle::Grid p{{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}};
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::Markov;
    spec.chain = MarkovChainSpec{{"a", "b", "c"}, p, FinitePmf::over_indices({1.0, 0.0, 0.0})};
    spec.phi = {{0.0, 0.0, 0.0}};
    spec.noise_values = {0.0};
    spec.noise_probs = {1.0};
    const Dataset md = generate(spec, 12);
    const double f[3] = {1.0, -2.0, 5.0};
    std::vector<double> mu{1.0, 0.0, 0.0};
    double ref = 0.0;
    for (int k = 0; k < 12; ++k) {
      for (int s = 0; s < 3; ++s) ref += f[s] * mu[s] / 12.0;
      mu = oracle::step(mu, p);
    }
    CHECK(average_mean(md, [&](std::size_t, double x) { return f[static_cast<int>(x)]; }) ==
          doctest::Approx(ref).epsilon(1e-13));
  }
  CHECK_THROWS_AS(empirical_mean(std::vector<double>{}), DomainError);
}

TEST_CASE("least squares fits") {
  SUBCASE("family containing the truth, noiseless") {
    const std::vector<double> phi{0.1, -0.4, 0.3};
    const Dataset d = make_data({0, 2, 1, 1, 0, 2, 2}, phi);
    const FunctionFamily fam = explicit_table({{0.0, 0.0, 0.0}, phi, {1.0, 1.0, 1.0}});
    const auto fit = fit_least_squares(d, fam, 1.0);
    CHECK(fit.member == 1);
    CHECK(fit.empirical_risk == 0.0);
    for (double x : {0.0, 1.0, 2.0}) CHECK(fit.fitted(x) == phi[static_cast<std::size_t>(x)]);
    CHECK(weak_error_of(d, fit.truncated) == 0.0);
    CHECK(approximation_bias(d, fam) == 0.0);
  }
  SUBCASE("constants zero and one against y = 1") {
    Dataset d = make_data({0, 1, 0}, {1.0, 1.0});
    const FunctionFamily fam = explicit_table({{0.0, 0.0}, {1.0, 1.0}});
    CHECK(fit_least_squares(d, fam, 2.0).member == 1);
    // Ties go to the first member.
    d.y = {0.5, 0.5, 0.5};
    CHECK(fit_least_squares(d, fam, 2.0).member == 0);
  }
  SUBCASE("linear span matches a coefficient grid search") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> st(0, 3);
    std::uniform_real_distribution<double> noise(-0.2, 0.2);
    std::vector<std::size_t> states(40);
    std::vector<double> eps(40);
    for (std::size_t i = 0; i < 40; ++i) {
      states[i] = st(rng);
      eps[i] = noise(rng);
    }
    const Dataset d = make_data(states, {0.1, 0.35, 0.5, 0.8}, eps);
    const FunctionFamily fam = linear_span({[](double) { return 1.0; }, [](double x) { return x; }}, 5.0);
    const auto fit = fit_least_squares(d, fam, 5.0);
    CHECK_FALSE(fit.ridge_used);
    double best = std::numeric_limits<double>::infinity();
    double best0 = 0, best1 = 0;
    const double h = 0.002;
    for (double c0 = -0.5; c0 <= 0.5; c0 += h)
      for (double c1 = -0.5; c1 <= 0.8; c1 += h) {
        const double r = empirical_risk(d, [&](double x) { return c0 + c1 * x; });
        if (r < best) {
          best = r;
          best0 = c0;
          best1 = c1;
        }
      }
    CHECK(fit.empirical_risk <= best + 1e-12);
    CHECK(std::abs(fit.coefficients[0] - best0) <= 2 * h);
    CHECK(std::abs(fit.coefficients[1] - best1) <= 2 * h);
  }
  SUBCASE("rank-deficient design falls back to a ridge") {
    const Dataset d = make_data({1, 1, 1}, {0.0, 0.5});
    const FunctionFamily fam = linear_span({[](double) { return 1.0; }, [](double x) { return x; }}, 1.0);
    const auto fit = fit_least_squares(d, fam, 1.0);
    CHECK(fit.ridge_used);
    CHECK(fit.fitted(1.0) == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("truncation is applied") {
    const Dataset d = make_data({0, 1}, {3.0, 3.0});
    const FunctionFamily fam = explicit_table({{3.0, 3.0}});
    CHECK(fit_least_squares(d, fam, 1.0).truncated(0.0) == 1.0);
  }
}

TEST_CASE("loss difference family") {
  const std::vector<double> phi{0.1, -0.2};
  const FunctionFamily fam = explicit_table({phi, {0.25, -0.25}, {-0.05, 0.2}});
  const auto truth = [&](std::size_t, double x) { return phi[static_cast<std::size_t>(x)]; };
  const auto g = loss_difference_family(fam, 0.25, truth);
  CHECK(g.range_bound == doctest::Approx(0.25));
  for (double y : {-0.25, 0.0, 0.17})
    for (double x : {0.0, 1.0}) CHECK(std::abs(g.members[0](3, x, y)) <= 1e-15);

  const auto zero = loss_difference_family(fam, 0.25, [](std::size_t, double) { return 0.0; });
  for (double x : {0.0, 1.0})
    for (std::size_t i = 0; i < 3; ++i) {
      const double f = fam.members[i](x);
      CHECK(zero.members[i](0, x, 0.0) == doctest::Approx(f * f).epsilon(1e-14));
      CHECK(zero.members[i](0, x, 0.0) >= 0.0);
    }

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  for (int rep = 0; rep < 200; ++rep) {
    const FunctionFamily r = explicit_table({{u(rng), u(rng)}, {u(rng), u(rng)}});
    const double p0 = u(rng), p1 = u(rng);
    const auto gr = loss_difference_family(r, 0.25, [&](std::size_t, double x) { return x < 0.5 ? p0 : p1; });
    for (int k = 0; k < 5; ++k) {
      const double v = gr.members[rep % 2](0, k % 2, u(rng));
      CHECK(std::abs(v) <= 1.0);
      CHECK(std::abs(v) <= gr.range_bound + 1e-15);
    }
  }
  CHECK_THROWS_AS(loss_difference_family(fam, 0.25, nullptr), CapabilityError);
}

TEST_CASE("weak error Monte Carlo") {
  const FunctionFamily span = linear_span({[](double) { return 1.0; }, [](double x) { return x; }}, 1.0);
  SUBCASE("unbiased noiseless case has zero bias and error") {
    GeneratorSpec spec = mdep_spec(1);
    spec.noise_values = {0.0};
    spec.noise_probs = {1.0};
    const auto est = weak_error([&](std::size_t i) { return generate(spec, 50, i); }, span, 1.0, 20);
    CHECK(std::abs(est.bias) <= 1e-20);
    CHECK(std::abs(est.mean) <= 1e-20);
  }
  SUBCASE("noisy unbiased case decreases in n") {
    const GeneratorSpec spec = mdep_spec(2);
    double prev = INFINITY;
    double prev_se = 0.0;
    for (std::size_t n : {50, 100, 200, 400}) {
      const auto est = weak_error([&](std::size_t i) { return generate(spec, n, i); }, span, 1.0, 200);
      CHECK(std::abs(est.bias) <= 1e-15);
      CHECK(est.mean <= prev + 3.0 * (est.std_error + prev_se));
      prev = est.mean;
      prev_se = est.std_error;
    }
  }
  SUBCASE("measured weak error stays below the bound") {
    const GeneratorSpec spec = mdep_spec(3);
    BoundParams p;
    p.c = 9.0;
    p.lambda = 1.5;
    p.V = 3;
    p.B = 1.0;
    p.n = 400;
    p.m = 2;
    const auto est = weak_error([&](std::size_t i) { return generate(spec, 400, i); }, span, 1.0, 100);
    const auto bound = weak_error_bound(p, est.bias, beta_envelope(spec, 2));
    CHECK(est.mean <= bound.total + 3.0 * est.std_error);
  }
  SUBCASE("thread count does not change the estimate") {
    const GeneratorSpec spec = mdep_spec(5);
    auto gen = [&](std::size_t i) { return generate(spec, 80, i); };
    const auto one = weak_error(gen, span, 1.0, 30, 1);
    const auto four = weak_error(gen, span, 1.0, 30, 4);
    CHECK(one.mean == four.mean);
    CHECK(one.std_error == four.std_error);
  }
}
