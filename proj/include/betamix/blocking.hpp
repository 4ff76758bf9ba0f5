#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "betamix/mixing.hpp"

namespace betamix {

// n = quotient * m + remainder, 0 <= remainder < m.
struct EuclideanDivision {
  std::size_t quotient = 0;
  std::size_t remainder = 0;
};

EuclideanDivision euclidean(std::size_t n, std::size_t m);

// Partition of {1, ..., n} into blocks of 1-based indices.
class Partition {
 public:
  Partition(std::size_t n, std::size_t m, std::vector<std::vector<std::size_t>> blocks);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t size() const { return offsets_.size() - 1; }
  std::span<const std::size_t> block(std::size_t k) const {
    return {indices_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }
  std::vector<std::vector<std::size_t>> blocks() const;

 private:
  friend Partition m_steps_partition(std::size_t n, std::size_t m);
  Partition() = default;

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<std::size_t> indices_;
  std::vector<std::size_t> offsets_;
};

// Blocks J_k = {k, k + m, k + 2m, ...} for k = 1..m, each running as far as
// it can inside {1, ..., n}.
Partition m_steps_partition(std::size_t n, std::size_t m);

// Independent-case deviation bound L(size, t). Below the validity threshold
// the bound is 1.
struct BoundFunction {
  std::function<double(std::size_t size, double t)> evaluator;
  std::function<double(std::size_t size)> validity_threshold;

  double operator()(std::size_t size, double t) const;
};

enum class LiftForm {
  Fine,    // r L(q+1, t) + (m - r) L(q, t) + n beta
  Coarse,  // m max(L(q+1, t), L(q, t)) + n beta
};

// Dependent-case bound over the m-steps partition, clipped to [0, 1], and 0
// when t exceeds deviation_cap. L(n + 1, t) is read as L(n, t).
double lifted_bound(const BoundFunction& base, std::size_t n, std::size_t m, double t,
                    double beta_at_m, double deviation_cap, LiftForm form = LiftForm::Fine);

// Trajectory source over a finite state space together with the exact
// per-index marginal laws (marginals[k][s] = P(Z_{k+1} = s)).
struct TrajectorySampler {
  std::function<std::vector<std::size_t>(std::size_t replication)> draw;
  Matrix marginals;
};

struct UnionBoundEstimate {
  std::size_t replications = 0;
  double lhs_frequency = 0.0;
  double lhs_stderr = 0.0;
  double rhs_frequency_sum = 0.0;
  double rhs_stderr = 0.0;

  double combined_stderr() const;
};

// Monte Carlo estimate of both sides of the union bound
// P(sup_g (a A + b Abar) g >= t) <= sum_J P(sup_g (a A_J + b Abar_J) g_J >= t)
// for a diagonal family given by family[member][state].
UnionBoundEstimate union_bound_check(const TrajectorySampler& sampler, const Matrix& family,
                                     const Partition& partition, double a, double b, double t,
                                     std::size_t replications);

}  // namespace betamix
