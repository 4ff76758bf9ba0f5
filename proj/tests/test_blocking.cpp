#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"

#include "betamix/blocking.hpp"
#include "betamix/error.hpp"
#include "betamix/simulate.hpp"

using namespace betamix;

namespace {

using Blocks = std::vector<std::vector<std::size_t>>;

BoundFunction constant_base(double L, double threshold = 0.0) {
  return {[L](std::size_t, double) { return L; }, [threshold](std::size_t) { return threshold; }};
}

GeneratorSpec two_state_spec(double p, double q, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.kind = GeneratorSpec::Kind::Markov;
  const double pi0 = q / (p + q);
  spec.chain = MarkovChainSpec{{"0", "1"}, {{1.0 - p, p}, {q, 1.0 - q}}, FinitePmf::over_indices({pi0, 1.0 - pi0})};
  spec.phi = {{0.0, 0.0}};
  spec.noise_values = {0.0};
  spec.noise_probs = {1.0};
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("euclidean division") {
  CHECK(euclidean(7, 3).quotient == 2);
  CHECK(euclidean(7, 3).remainder == 1);
  CHECK(euclidean(9, 1).quotient == 9);
  CHECK(euclidean(9, 1).remainder == 0);
  CHECK(euclidean(9, 9).quotient == 1);
  CHECK(euclidean(9, 9).remainder == 0);
  CHECK_THROWS_AS(euclidean(3, 4), DomainError);
  CHECK_THROWS_AS(euclidean(3, 0), DomainError);
}

TEST_CASE("m_steps_partition examples") {
  CHECK(m_steps_partition(7, 3).blocks() == Blocks{{1, 4, 7}, {2, 5}, {3, 6}});
  CHECK(m_steps_partition(6, 3).blocks() == Blocks{{1, 4}, {2, 5}, {3, 6}});
  CHECK(m_steps_partition(5, 1).blocks() == Blocks{{1, 2, 3, 4, 5}});
  CHECK(m_steps_partition(4, 4).blocks() == Blocks{{1}, {2}, {3}, {4}});
}

TEST_CASE("m_steps_partition invariants on a small grid") {
  for (std::size_t n = 1; n <= 60; ++n) {
    for (std::size_t m = 1; m <= n; ++m) {
      const Partition p = m_steps_partition(n, m);
      REQUIRE(p.size() == m);
      std::set<std::size_t> seen;
      const std::size_t q = n / m;
      const std::size_t r = n % m;
      for (std::size_t k = 0; k < m; ++k) {
        const auto b = p.block(k);
        CHECK(b.size() == (k < r ? q + 1 : q));
        CHECK(b[0] == k + 1);
        for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] - b[i - 1] == m);
        seen.insert(b.begin(), b.end());
      }
      CHECK(seen.size() == n);
      CHECK(*seen.begin() == 1);
      CHECK(*seen.rbegin() == n);
    }
  }
}

TEST_CASE("Partition rejects overlap and gaps") {
  CHECK_THROWS_AS(Partition(3, 1, {{1, 2}, {2, 3}}), MalformedInput);
  CHECK_THROWS_AS(Partition(3, 1, {{1, 2}}), MalformedInput);
  CHECK_NOTHROW(Partition(3, 2, {{1, 3}, {2}}));
}

TEST_CASE("lifted_bound") {
  const BoundFunction base{[](std::size_t size, double t) { return std::exp(-0.01 * size * t); },
                           [](std::size_t) { return 0.0; }};
  SUBCASE("m = 1 and beta = 0 recover the base bound") {
    for (double t : {0.1, 0.5, 1.0, 1.9}) {
      for (auto form : {LiftForm::Fine, LiftForm::Coarse}) {
        CHECK(lifted_bound(base, 50, 1, t, 0.0, 2.0, form) == std::min(1.0, base(50, t)));
      }
    }
    CHECK(lifted_bound(base, 50, 1, 2.5, 0.0, 2.0) == 0.0);
  }
  SUBCASE("hand computation at n = 7, m = 3") {
    // (q, r) = (2, 1): 1 L(3) + 2 L(2) + 7 beta.
    CHECK(lifted_bound(constant_base(0.01), 7, 3, 0.5, 0.001, 2.0, LiftForm::Fine) ==
          doctest::Approx(0.01 + 0.02 + 0.007).epsilon(1e-14));
    CHECK(lifted_bound(constant_base(0.01), 7, 3, 0.5, 0.001, 2.0, LiftForm::Coarse) ==
          doctest::Approx(0.03 + 0.007).epsilon(1e-14));
    CHECK(lifted_bound(constant_base(0.3), 7, 3, 0.5, 0.1, 2.0) == 1.0);
  }
  SUBCASE("Coarse never undercuts Fine") {
    for (std::size_t m = 1; m <= 10; ++m)
      for (double t : {0.2, 0.7, 1.4})
        CHECK(lifted_bound(base, 97, m, t, 0.0, 2.0, LiftForm::Coarse) >=
              lifted_bound(base, 97, m, t, 0.0, 2.0, LiftForm::Fine));
  }
  SUBCASE("below threshold the base bound is 1") {
    CHECK(lifted_bound(constant_base(0.001, 0.4), 10, 1, 0.3, 0.0, 2.0) == 1.0);
    CHECK(lifted_bound(constant_base(0.001, 0.4), 10, 1, 0.5, 0.0, 2.0) == doctest::Approx(0.001));
  }
  SUBCASE("domain") {
    CHECK_THROWS_AS(lifted_bound(base, 10, 2, -0.1, 0.0, 2.0), DomainError);
    CHECK_THROWS_AS(lifted_bound(base, 10, 2, 0.1, 1.5, 2.0), DomainError);
  }
}

TEST_CASE("union_bound_check") {
  const Matrix family{{0.0, 1.0}, {1.0, 0.0}};
  SUBCASE("singleton partition estimates the same event") {
    const auto spec = two_state_spec(0.2, 0.3, 4);
    const TrajectorySampler sampler = make_sampler(spec, 30);
    const Partition whole = m_steps_partition(30, 1);
    const auto est = union_bound_check(sampler, family, whole, 0.5, -1.5, -0.3, 2000);
    CHECK(est.lhs_frequency == est.rhs_frequency_sum);
    CHECK(est.lhs_frequency > 0.0);
  }
  SUBCASE("lhs within three combined standard errors of rhs") {
    const auto spec = two_state_spec(0.2, 0.3, 5);
    const TrajectorySampler sampler = make_sampler(spec, 40);
    const Partition p = m_steps_partition(40, 4);
    for (double t : {-0.4, -0.3, -0.2, -0.1}) {
      const auto est = union_bound_check(sampler, family, p, 0.5, -1.5, t, 2000);
      CHECK(est.lhs_frequency <= est.rhs_frequency_sum + 3.0 * est.combined_stderr());
    }
  }
  SUBCASE("t above the statistic range gives zero on both sides") {
    const auto spec = two_state_spec(0.2, 0.3, 6);
    const TrajectorySampler sampler = make_sampler(spec, 20);
    const auto est = union_bound_check(sampler, family, m_steps_partition(20, 3), 0.5, -1.5, 0.6, 500);
    CHECK(est.lhs_frequency == 0.0);
    CHECK(est.rhs_frequency_sum == 0.0);
  }
}
