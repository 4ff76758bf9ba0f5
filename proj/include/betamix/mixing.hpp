#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "betamix/pmf.hpp"

namespace betamix {

using Matrix = std::vector<std::vector<double>>;

// Finite-state Markov chain; Z_1 has law `initial`.
struct MarkovChainSpec {
  std::vector<std::string> states;
  Matrix transition;  // row-stochastic
  FinitePmf initial;

  // Throws MalformedInput when rows are not stochastic or shapes disagree.
  void validate() const;
  std::size_t size() const { return states.size(); }
};

// Law of a finite process Z_J. Axis i of `law` holds Z_{index[i]}; indices are
// strictly increasing and start at 1 or later.
struct Process {
  JointPmf law;
  std::vector<std::size_t> index;

  explicit Process(JointPmf law);  // J = {1, ..., N}
  Process(JointPmf law, std::vector<std::size_t> index);

  // Restriction Z_{J'} for J' a subset of J.
  Process restrict(std::span<const std::size_t> subset) const;
};

// beta(sigma(V), sigma(W)) for a two-axis joint of (V, W): half the L1 distance
// between the joint and the product of its marginals.
double beta_coefficient(const JointPmf& joint);

// beta_{Z_J}(m, l) = beta(sigma(Z_{J cap [1, l-m]}), sigma(Z_{J cap {l}})).
// Zero when either index group is empty.
double beta_m_dependence(const Process& process, std::size_t m, std::size_t l);

// sup over l of beta_m_dependence; l ranges over 1..max(J).
double beta_max(const Process& process, std::size_t m);

struct MarkovBeta {
  double value = 0.0;
  std::size_t horizon = 0;
  std::size_t argmax = 1;  // time n attaining the scan maximum
};

inline constexpr std::size_t kDefaultMarkovHorizon = 64;

Matrix matrix_power(const Matrix& transition, std::size_t power);
// Law of Z_n (n >= 1).
std::vector<double> marginal_at(const MarkovChainSpec& chain, std::size_t n);

// max over n in 1..horizon of beta(sigma(Z_n), sigma(Z_{n+m})).
MarkovBeta markov_beta(const MarkovChainSpec& chain, std::size_t m,
                       std::size_t horizon = kDefaultMarkovHorizon);

// Explicit law of (Z_1, ..., Z_n).
JointPmf markov_process_law(const MarkovChainSpec& chain, std::size_t n,
                            std::size_t cell_cap = kDefaultCellCap);

enum class RateModel { Subexponential, Subpolynomial };

// Envelope a*exp(-b*m^gamma) (subexponential) or a*m^(-gamma) (subpolynomial).
struct MixingRate {
  RateModel model = RateModel::Subexponential;
  double a = 1.0;
  double b = 0.0;  // unused for the subpolynomial model
  double gamma = 1.0;

  double envelope(double m) const;
};

struct RateFitOptions {
  // Subexponential: gamma defaults to 1 and b is fitted unless fixed.
  // Subpolynomial: gamma is fitted unless fixed.
  std::optional<double> gamma;
  std::optional<double> b;
};

// Smallest envelope of the chosen shape dominating every point (m, beta(m)).
// Shape parameters come from a log-linear least-squares fit over the positive
// points; a is then the least value giving pointwise dominance.
MixingRate fit_mixing_rate(std::span<const std::pair<std::size_t, double>> betas,
                           RateModel model, const RateFitOptions& options = {});

}  // namespace betamix
