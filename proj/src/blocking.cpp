#include "betamix/blocking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "betamix/error.hpp"

namespace betamix {

EuclideanDivision euclidean(std::size_t n, std::size_t m) {
  if (m < 1 || m > n) {
    throw DomainError("euclidean: need 1 <= m <= n, got n=" + std::to_string(n) +
                      ", m=" + std::to_string(m));
  }
  return {n / m, n % m};
}

Partition::Partition(std::size_t n, std::size_t m, std::vector<std::vector<std::size_t>> blocks)
    : n_(n), m_(m) {
  std::vector<bool> seen(n + 1, false);
  offsets_.push_back(0);
  for (const auto& block : blocks) {
    if (block.empty()) throw MalformedInput("Partition: empty block");
    for (std::size_t j : block) {
      if (j == 0 || j > n || seen[j]) {
        throw MalformedInput("Partition: blocks must be disjoint subsets of 1..n");
      }
      seen[j] = true;
      indices_.push_back(j);
    }
    offsets_.push_back(indices_.size());
  }
  if (indices_.size() != n) throw MalformedInput("Partition: blocks do not cover 1..n");
}

std::vector<std::vector<std::size_t>> Partition::blocks() const {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(size());
  for (std::size_t k = 0; k < size(); ++k) {
    auto b = block(k);
    out.emplace_back(b.begin(), b.end());
  }
  return out;
}

Partition m_steps_partition(std::size_t n, std::size_t m) {
  const auto [q, r] = euclidean(n, m);
  Partition p;
  p.n_ = n;
  p.m_ = m;
  p.indices_.reserve(n);
  p.offsets_.reserve(m + 1);
  p.offsets_.push_back(0);
  for (std::size_t k = 1; k <= m; ++k) {
    const std::size_t length = k <= r ? q + 1 : q;
    for (std::size_t l = 0; l < length; ++l) p.indices_.push_back(k + l * m);
    p.offsets_.push_back(p.indices_.size());
  }
  return p;
}

double BoundFunction::operator()(std::size_t size, double t) const {
  if (validity_threshold && t < validity_threshold(size)) return 1.0;
  return evaluator(size, t);
}

double lifted_bound(const BoundFunction& base, std::size_t n, std::size_t m, double t,
                    double beta_at_m, double deviation_cap, LiftForm form) {
  if (t < 0.0) throw DomainError("lifted_bound: t must be nonnegative");
  if (beta_at_m < 0.0 || beta_at_m > 1.0) {
    throw DomainError("lifted_bound: beta must lie in [0, 1]");
  }
  const auto [q, r] = euclidean(n, m);
  if (t > deviation_cap) return 0.0;

  const std::size_t upper = std::min(q + 1, n);
  double total = 0.0;
  if (form == LiftForm::Fine) {
    // Zero-weight terms are skipped so an infinite L never meets a zero weight.
    if (r > 0) total += static_cast<double>(r) * base(upper, t);
    if (m - r > 0) total += static_cast<double>(m - r) * base(q, t);
  } else {
    total = static_cast<double>(m) * std::max(base(upper, t), base(q, t));
  }
  total += static_cast<double>(n) * beta_at_m;
  return std::clamp(total, 0.0, 1.0);
}

double UnionBoundEstimate::combined_stderr() const {
  return std::sqrt(lhs_stderr * lhs_stderr + rhs_stderr * rhs_stderr);
}

namespace {

// sup over the family of (a A_J + b Abar_J) g, with per-state expectations
// precomputed in `expected[member][index]`.
double block_statistic(const Matrix& family, const Matrix& expected,
                       std::span<const std::size_t> path, std::span<const std::size_t> block,
                       double a, double b) {
  double best = -std::numeric_limits<double>::infinity();
  const double size = static_cast<double>(block.size());
  for (std::size_t f = 0; f < family.size(); ++f) {
    double empirical = 0.0;
    double average = 0.0;
    for (std::size_t j : block) {
      empirical += family[f][path[j - 1]];
      average += expected[f][j - 1];
    }
    best = std::max(best, (a * empirical + b * average) / size);
  }
  return best;
}

}  // namespace

UnionBoundEstimate union_bound_check(const TrajectorySampler& sampler, const Matrix& family,
                                     const Partition& partition, double a, double b, double t,
                                     std::size_t replications) {
  if (replications == 0) throw DomainError("union_bound_check: zero replications");
  if (family.empty()) throw MalformedInput("union_bound_check: empty family");
  const std::size_t n = partition.n();
  if (sampler.marginals.size() != n) {
    throw MalformedInput("union_bound_check: marginals do not match the partition size");
  }

  Matrix expected(family.size(), std::vector<double>(n, 0.0));
  for (std::size_t f = 0; f < family.size(); ++f) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto& law = sampler.marginals[k];
      if (law.size() != family[f].size()) {
        throw MalformedInput("union_bound_check: family and state space sizes differ");
      }
      for (std::size_t s = 0; s < law.size(); ++s) expected[f][k] += law[s] * family[f][s];
    }
  }

  std::vector<std::size_t> whole(n);
  for (std::size_t k = 0; k < n; ++k) whole[k] = k + 1;

  std::size_t lhs_hits = 0;
  double rhs_sum = 0.0;
  double rhs_sq = 0.0;
  for (std::size_t rep = 0; rep < replications; ++rep) {
    const auto path = sampler.draw(rep);
    if (path.size() != n) throw MalformedInput("union_bound_check: trajectory length mismatch");
    if (block_statistic(family, expected, path, whole, a, b) >= t) ++lhs_hits;
    double count = 0.0;
    for (std::size_t k = 0; k < partition.size(); ++k) {
      if (block_statistic(family, expected, path, partition.block(k), a, b) >= t) count += 1.0;
    }
    rhs_sum += count;
    rhs_sq += count * count;
  }

  const double reps = static_cast<double>(replications);
  UnionBoundEstimate out;
  out.replications = replications;
  out.lhs_frequency = static_cast<double>(lhs_hits) / reps;
  out.lhs_stderr = std::sqrt(out.lhs_frequency * (1.0 - out.lhs_frequency) / reps);
  out.rhs_frequency_sum = rhs_sum / reps;
  const double variance = std::max(0.0, rhs_sq / reps - out.rhs_frequency_sum * out.rhs_frequency_sum);
  out.rhs_stderr = std::sqrt(variance / reps);
  return out;
}

}  // namespace betamix
