#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "betamix/coupling.hpp"
#include "betamix/error.hpp"
#include "betamix/mixing.hpp"

using namespace betamix;

namespace {

double max_gap(const std::map<std::vector<std::size_t>, double>& a,
               const std::map<std::vector<std::size_t>, double>& b) {
  double gap = 0.0;
  for (const auto& [k, v] : a) {
    const auto it = b.find(k);
    gap = std::max(gap, std::abs(v - (it == b.end() ? 0.0 : it->second)));
  }
  return gap;
}

double disagreement(const JointPmf& j, std::size_t a, std::size_t b) {
  const auto sizes = oracle::sizes_of(j);
  double total = 0.0;
  for (std::size_t cell = 0; cell < j.probs().size(); ++cell) {
    const auto idx = oracle::decode(cell, sizes);
    if (idx[a] != idx[b]) total += j.probs()[cell];
  }
  return total;
}

// Max deviation of the law of the listed axes from the product of their laws.
double independence_gap(const JointPmf& j, const std::vector<std::size_t>& axes) {
  const auto joint = oracle::marginal(j, axes);
  std::vector<std::map<std::vector<std::size_t>, double>> singles;
  for (std::size_t a : axes) singles.push_back(oracle::marginal(j, {a}));
  double gap = 0.0;
  const auto sizes = oracle::sizes_of(j);
  std::size_t cells = 1;
  for (std::size_t a : axes) cells *= sizes[a];
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<std::size_t> sub;
    for (std::size_t a : axes) sub.push_back(sizes[a]);
    const auto idx = oracle::decode(c, sub);
    double prod = 1.0;
    for (std::size_t i = 0; i < axes.size(); ++i) prod *= singles[i].at({idx[i]});
    const auto it = joint.find(idx);
    gap = std::max(gap, std::abs((it == joint.end() ? 0.0 : it->second) - prod));
  }
  return gap;
}

}  // namespace

TEST_CASE("berbee_couple") {
  SUBCASE("product joint gives a.s. equality") {
    const std::vector<FinitePmf> ms{FinitePmf::over_indices({0.2, 0.8}),
                                    FinitePmf::over_indices({0.1, 0.3, 0.6})};
    const auto r = berbee_couple(JointPmf::product(ms));
    CHECK(std::abs(r.mismatch_probs.at(0)) <= 1e-15);
    CHECK(std::abs(disagreement(r.extended_joint, 1, 2)) <= 1e-15);
  }
  SUBCASE("diagonal uniform binary joint") {
    const JointPmf diag({oracle::labels(2), oracle::labels(2)}, {0.5, 0.0, 0.0, 0.5});
    const auto r = berbee_couple(diag);
    CHECK(r.mismatch_probs.at(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r.mismatch_probs.at(0) == doctest::Approx(beta_coefficient(diag)).epsilon(1e-14));
  }
  SUBCASE("random joints: mismatch, marginal, independence") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 40; ++rep) {
      const JointPmf j = oracle::random_joint(rng, {1 + rng() % 5, 1 + rng() % 5}, rep % 3 == 0);
      const auto r = berbee_couple(j);
      REQUIRE(r.extended_joint.axis_count() == 3);
      CHECK(r.starred_of == std::vector<std::size_t>{1});
      CHECK(std::abs(r.mismatch_probs[0] - oracle::beta(j, {0}, {1})) <= 1e-10);
      CHECK(std::abs(disagreement(r.extended_joint, 1, 2) - r.mismatch_probs[0]) <= 1e-12);
      CHECK(max_gap(oracle::marginal(r.extended_joint, {2}), oracle::marginal(j, {1})) < 1e-12);
      CHECK(max_gap(oracle::marginal(r.extended_joint, {0, 1}), oracle::marginal(j, {0, 1})) < 1e-12);
      CHECK(independence_gap(r.extended_joint, {0, 2}) < 1e-10);
      const auto rep_report = verify_coupling(r, j);
      CHECK(rep_report.max() < 1e-10);
    }
  }
  SUBCASE("rejects non-pair joints") {
    const JointPmf three({oracle::labels(2), oracle::labels(2), oracle::labels(2)}, std::vector<double>(8, 0.125));
    CHECK_THROWS_AS(berbee_couple(three), MalformedInput);
  }
}

TEST_CASE("generalized_berbee") {
  SUBCASE("independent process keeps V* = V") {
    std::vector<FinitePmf> ms;
    for (int i = 0; i < 3; ++i) ms.push_back(FinitePmf::over_indices({0.3 + 0.1 * i, 0.7 - 0.1 * i}));
    const JointPmf law = JointPmf::product(ms);
    const auto r = generalized_berbee(law);
    for (double p : r.mismatch_probs) CHECK(std::abs(p) <= 1e-15);
    const auto report = verify_coupling(r, law);
    CHECK(std::abs(report.max()) <= 1e-15);
  }
  SUBCASE("two indices reduce to the pair coupling") {
    std::mt19937_64 rng(7);
    const JointPmf j = oracle::random_joint(rng, {3, 3});
    const auto seq = generalized_berbee(j);
    const auto pair = berbee_couple(j);
    REQUIRE(seq.mismatch_probs.size() == 2);
    CHECK(std::abs(seq.mismatch_probs[0]) <= 1e-15);
    CHECK(seq.mismatch_probs[1] == doctest::Approx(pair.mismatch_probs[0]).epsilon(1e-12));
    // (V1, V2, V*_2) from the sequence version matches the pair construction.
    const auto lhs = oracle::marginal(seq.extended_joint, {0, 1, 3});
    const auto rhs = oracle::marginal(pair.extended_joint, {0, 1, 2});
    CHECK(max_gap(lhs, rhs) < 1e-12);
  }
  SUBCASE("copies: mismatch equals the pairwise coefficient") {
    const JointPmf copies({oracle::labels(2), oracle::labels(2), oracle::labels(2)},
                          {0.35, 0, 0, 0, 0, 0, 0, 0.65});
    const auto r = generalized_berbee(copies);
    const Process p(copies);
    CHECK(r.mismatch_probs[1] == doctest::Approx(beta_m_dependence(p, 1, 2)).epsilon(1e-12));
    CHECK(r.mismatch_probs[2] == doctest::Approx(beta_m_dependence(p, 1, 3)).epsilon(1e-12));
    CHECK(r.mismatch_probs[1] == doctest::Approx(2 * 0.35 * 0.65).epsilon(1e-12));
  }
  SUBCASE("random three-index processes satisfy all coupling properties") {
    std::mt19937_64 rng(55);
    for (int rep = 0; rep < 15; ++rep) {
      const JointPmf law = oracle::random_joint(rng, {2, 1 + rng() % 3, 2}, rep % 2 == 1);
      const auto r = generalized_berbee(law);
      const JointPmf& ext = r.extended_joint;
      REQUIRE(ext.axis_count() == 6);
      CHECK(max_gap(oracle::marginal(ext, {0, 1, 2}), oracle::marginal(law, {0, 1, 2})) < 1e-12);
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(max_gap(oracle::marginal(ext, {3 + k}), oracle::marginal(law, {k})) < 1e-12);
        const double expected = k == 0 ? 0.0 : oracle::beta(law, k == 1 ? std::vector<std::size_t>{0}
                                                                         : std::vector<std::size_t>{0, 1},
                                                            {k});
        CHECK(std::abs(disagreement(ext, k, 3 + k) - expected) <= 1e-10);
      }
      CHECK(independence_gap(ext, {3, 4, 5}) < 1e-10);
      CHECK(verify_coupling(r, law).max() < 1e-10);
    }
  }
}

TEST_CASE("verify_coupling detects a corrupted cell") {
  std::mt19937_64 rng(9);
  const JointPmf law = oracle::random_joint(rng, {2, 2, 2});
  auto r = generalized_berbee(law);
  std::vector<double> probs = r.extended_joint.probs();
  probs[3] += 1e-3;
  double s = 0.0;
  for (double p : probs) s += p;
  for (double& p : probs) p /= s;
  r.extended_joint = JointPmf(r.extended_joint.axes(), probs);
  const auto report = verify_coupling(r, law);
  CHECK(report.original_marginal_error > 1e-5);
  CHECK(report.max() > 1e-5);
}

TEST_CASE("disagreement_probability") {
  const JointPmf j({oracle::labels(2), oracle::labels(2)}, {0.1, 0.2, 0.3, 0.4});
  CHECK(disagreement_probability(j, 0, 1) == doctest::Approx(0.5).epsilon(1e-14));
}
