#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betamix/blocking.hpp"
#include "betamix/bounds.hpp"
#include "betamix/entropy.hpp"
#include "betamix/mixing.hpp"
#include "betamix/pmf.hpp"
#include "betamix/regression.hpp"

namespace betamix {

// Finite-state data source. States are 0..S-1 and the input point of state s
// is x = s.
//   markov:      X follows `chain`.
//   m-dependent: X_k = xi_k + ... + xi_{k+L-1} with xi i.i.d. from
//                `innovation` over {0..K-1}; beta(m) = 0 for m >= L.
//   iid:         X_k i.i.d. from `law`.
// Responses are Y_k = Phi_k(X_k) + noise with zero-mean bounded noise.
struct GeneratorSpec {
  enum class Kind { Markov, MDependent, Iid };

  Kind kind = Kind::Iid;
  std::optional<MarkovChainSpec> chain;
  std::size_t dependence_lag = 1;  // L
  std::optional<FinitePmf> innovation;
  std::optional<FinitePmf> law;

  Matrix phi;                       // one row (stationary) or one row per index
  std::vector<double> noise_values;
  std::vector<double> noise_probs;
  double response_bound = 1.0;
  std::uint64_t seed = 0;

  std::size_t state_count() const;
  void validate() const;
};

std::string kind_name(GeneratorSpec::Kind kind);

// Deterministic in (spec, n, replication).
std::vector<std::size_t> generate_states(const GeneratorSpec& spec, std::size_t n,
                                         std::size_t replication);
Dataset generate(const GeneratorSpec& spec, std::size_t n, std::size_t replication = 0);

// exact[k][s] = P(X_{k+1} = s).
Matrix exact_marginals(const GeneratorSpec& spec, std::size_t n);
// Joint law of X_{1:n}; for small n only.
JointPmf process_law(const GeneratorSpec& spec, std::size_t n,
                     std::size_t cell_cap = kDefaultCellCap);
// beta_X(m): exact for markov (sup over the first `horizon` times) and iid;
// for m-dependent processes with m < L, the dependence between X_l and the
// innovations it shares with the past, which dominates beta(m).
double beta_envelope(const GeneratorSpec& spec, std::size_t m, std::size_t horizon = 64);

TrajectorySampler make_sampler(const GeneratorSpec& spec, std::size_t n);

// Wilson score half-width at z = 1.
double wilson_stderr(std::size_t hits, std::size_t trials);

struct DeviationRow {
  std::size_t n = 0;
  std::size_t m = 0;
  double t = 0.0;
  double frequency = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool dominant = false;  // frequency <= bound + 3 stderr
  bool resolved = false;  // frequency + 3 stderr <= bound
  bool vacuous = false;   // bound >= 1; also counts as dominant and resolved
};

struct WeakErrorRow {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t replications = 0;
  double weak_error = 0.0;
  double std_error = 0.0;
  double bias = 0.0;
  double bound_total = 0.0;
  double bound_variance = 0.0;
  double bound_beta = 0.0;
  double beta_at_m = 0.0;
  bool dominant = false;
};

struct ExperimentReport {
  std::string name;
  std::string generator;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  BoundParams params;
  std::vector<DeviationRow> deviation;
  std::vector<WeakErrorRow> weak;
  std::optional<double> slope;  // log-log slope of weak error against n

  bool all_dominant() const;
};

// Frequency of sup_f ((1 - eps) A - (1 + eps) Abar) f >= t over replications,
// against beta_deviation_bound. family[member][state] must lie in [0, B].
// beta defaults to params.mixing's envelope, else beta_envelope(spec, m).
ExperimentReport deviation_experiment(const GeneratorSpec& spec, const Matrix& family,
                                      const BoundParams& params, std::span<const double> t_grid,
                                      std::size_t replications, std::size_t threads = 1,
                                      std::optional<EntropyEstimate> entropy = {},
                                      std::optional<double> beta_at_m = {});

// Weak error of the truncated least-squares fit at every n in the grid,
// against weak_error_bound with params.m.
ExperimentReport weak_error_experiment(const GeneratorSpec& spec, const FunctionFamily& family,
                                       const BoundParams& params,
                                       std::span<const std::size_t> n_grid,
                                       std::size_t replications, std::size_t threads = 1);

// Least-squares slope of log y against log x over points with y > 0.
std::optional<double> log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace betamix
