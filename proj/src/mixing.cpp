#include "betamix/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "betamix/error.hpp"

namespace betamix {

void MarkovChainSpec::validate() const {
  if (states.empty()) throw MalformedInput("MarkovChainSpec: no states");
  if (transition.size() != states.size()) {
    throw MalformedInput("MarkovChainSpec: transition has " + std::to_string(transition.size()) +
                         " rows for " + std::to_string(states.size()) + " states");
  }
  if (initial.size() != states.size()) {
    throw MalformedInput("MarkovChainSpec: initial law has the wrong dimension");
  }
  for (std::size_t i = 0; i < transition.size(); ++i) {
    const auto& row = transition[i];
    if (row.size() != states.size()) {
      throw MalformedInput("MarkovChainSpec: transition row " + std::to_string(i) +
                           " has the wrong length");
    }
    for (double p : row) {
      if (!std::isfinite(p) || p < 0.0) {
        throw MalformedInput("MarkovChainSpec: negative transition probability in row " +
                             std::to_string(i));
      }
    }
    if (std::abs(stable_sum(row) - 1.0) > kProbabilityTolerance) {
      throw MalformedInput("MarkovChainSpec: transition row " + std::to_string(i) +
                           " does not sum to 1");
    }
  }
}

Process::Process(JointPmf law_in) : law(std::move(law_in)) {
  index.resize(law.axis_count());
  std::iota(index.begin(), index.end(), std::size_t{1});
}

Process::Process(JointPmf law_in, std::vector<std::size_t> index_in)
    : law(std::move(law_in)), index(std::move(index_in)) {
  if (index.size() != law.axis_count()) {
    throw MalformedInput("Process: one index label per axis is required");
  }
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] == 0 || (i > 0 && index[i] <= index[i - 1])) {
      throw MalformedInput("Process: indices must be positive and strictly increasing");
    }
  }
}

Process Process::restrict(std::span<const std::size_t> subset) const {
  std::vector<std::size_t> axes;
  std::vector<std::size_t> kept;
  for (std::size_t j : subset) {
    auto it = std::find(index.begin(), index.end(), j);
    if (it == index.end()) throw MalformedInput("Process::restrict: index not in J");
    axes.push_back(static_cast<std::size_t>(it - index.begin()));
    kept.push_back(j);
  }
  return Process(law.marginal(axes), std::move(kept));
}

double beta_coefficient(const JointPmf& joint) {
  if (joint.axis_count() != 2) {
    throw MalformedInput("beta_coefficient: expected a joint over exactly two axes, got " +
                         std::to_string(joint.axis_count()));
  }
  const std::size_t rows = joint.axis_size(0);
  const std::size_t cols = joint.axis_size(1);
  const auto& p = joint.probs();
  std::vector<double> row_mass(rows, 0.0);
  std::vector<double> col_mass(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      row_mass[i] += p[i * cols + j];
      col_mass[j] += p[i * cols + j];
    }
  }
  std::vector<double> terms(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      terms[i * cols + j] = std::abs(p[i * cols + j] - row_mass[i] * col_mass[j]);
    }
  }
  return std::clamp(0.5 * stable_sum(terms), 0.0, 1.0);
}

double beta_m_dependence(const Process& process, std::size_t m, std::size_t l) {
  if (m == 0 || l == 0) throw DomainError("beta_m_dependence: m and l must be positive");
  std::vector<std::size_t> past;
  std::vector<std::size_t> present;
  for (std::size_t a = 0; a < process.index.size(); ++a) {
    const std::size_t j = process.index[a];
    if (l > m && j <= l - m) past.push_back(a);
    if (j == l) present.push_back(a);
  }
  if (past.empty() || present.empty()) return 0.0;
  const std::vector<std::vector<std::size_t>> groups{past, present};
  return beta_coefficient(process.law.group(groups));
}

double beta_max(const Process& process, std::size_t m) {
  if (m == 0) throw DomainError("beta_max: m must be positive");
  double best = 0.0;
  // Only l in J can contribute a nonzero coefficient.
  for (std::size_t l : process.index) best = std::max(best, beta_m_dependence(process, m, l));
  return best;
}

Matrix matrix_power(const Matrix& transition, std::size_t power) {
  const std::size_t n = transition.size();
  Matrix result(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) result[i][i] = 1.0;
  Matrix base = transition;
  auto multiply = [n](const Matrix& x, const Matrix& y) {
    Matrix z(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) z[i][j] += x[i][k] * y[k][j];
    return z;
  };
  while (power > 0) {
    if (power & 1U) result = multiply(result, base);
    power >>= 1U;
    if (power > 0) base = multiply(base, base);
  }
  return result;
}

namespace {

std::vector<double> step(const std::vector<double>& mu, const Matrix& p) {
  std::vector<double> next(mu.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < mu.size(); ++j) next[j] += mu[i] * p[i][j];
  return next;
}

JointPmf pair_law(const MarkovChainSpec& chain, const std::vector<double>& mu,
                  const Matrix& power) {
  const std::size_t s = chain.size();
  std::vector<double> cells(s * s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) cells[i * s + j] = mu[i] * power[i][j];
  const double total = stable_sum(cells);
  for (double& c : cells) c /= total;
  return JointPmf({chain.states, chain.states}, std::move(cells));
}

}  // namespace

std::vector<double> marginal_at(const MarkovChainSpec& chain, std::size_t n) {
  if (n == 0) throw DomainError("marginal_at: time index starts at 1");
  std::vector<double> mu = chain.initial.probs();
  for (std::size_t k = 1; k < n; ++k) mu = step(mu, chain.transition);
  return mu;
}

MarkovBeta markov_beta(const MarkovChainSpec& chain, std::size_t m, std::size_t horizon) {
  chain.validate();
  if (m == 0) throw DomainError("markov_beta: m must be positive");
  if (horizon == 0) throw DomainError("markov_beta: horizon must be positive");
  const Matrix power = matrix_power(chain.transition, m);
  MarkovBeta out;
  out.horizon = horizon;
  std::vector<double> mu = chain.initial.probs();
  for (std::size_t n = 1; n <= horizon; ++n) {
    const double value = beta_coefficient(pair_law(chain, mu, power));
    if (value > out.value) {
      out.value = value;
      out.argmax = n;
    }
    mu = step(mu, chain.transition);
  }
  return out;
}

JointPmf markov_process_law(const MarkovChainSpec& chain, std::size_t n, std::size_t cell_cap) {
  chain.validate();
  if (n == 0) throw DomainError("markov_process_law: n must be positive");
  const std::size_t s = chain.size();
  std::size_t cells = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (cells > cell_cap / s) throw SizeError("markov_process_law: law exceeds the cell cap");
    cells *= s;
  }
  std::vector<double> probs(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    // Most significant digit is Z_1.
    std::size_t rest = cell;
    std::vector<std::size_t> path(n);
    for (std::size_t k = n; k-- > 0;) {
      path[k] = rest % s;
      rest /= s;
    }
    double p = chain.initial[path[0]];
    for (std::size_t k = 1; k < n && p > 0.0; ++k) p *= chain.transition[path[k - 1]][path[k]];
    probs[cell] = p;
  }
  const double total = stable_sum(probs);
  for (double& p : probs) p /= total;
  return JointPmf(std::vector<JointPmf::Axis>(n, chain.states), std::move(probs), cell_cap);
}

double MixingRate::envelope(double m) const {
  if (model == RateModel::Subexponential) return a * std::exp(-b * std::pow(m, gamma));
  return a * std::pow(m, -gamma);
}

MixingRate fit_mixing_rate(std::span<const std::pair<std::size_t, double>> betas,
                           RateModel model, const RateFitOptions& options) {
  if (betas.empty()) throw DegenerateFit("fit_mixing_rate: no points");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (betas[i].first == 0 || (i > 0 && betas[i].first <= betas[i - 1].first)) {
      throw MalformedInput("fit_mixing_rate: m values must be positive and increasing");
    }
  }

  MixingRate rate;
  rate.model = model;
  if (model == RateModel::Subexponential) {
    rate.gamma = options.gamma.value_or(1.0);
    if (!(rate.gamma > 0.0)) throw DomainError("fit_mixing_rate: gamma must be positive");
  } else if (options.gamma) {
    rate.gamma = *options.gamma;
  }

  // Shape coordinate x with log beta = log a - slope * x.
  auto shape_x = [&](double m) {
    return model == RateModel::Subexponential ? std::pow(m, rate.gamma) : std::log(m);
  };

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [m, beta] : betas) {
    if (beta > 0.0) {
      xs.push_back(shape_x(static_cast<double>(m)));
      ys.push_back(std::log(beta));
    }
  }
  if (xs.empty()) throw DegenerateFit("fit_mixing_rate: every beta value is zero");

  const bool slope_fixed =
      model == RateModel::Subexponential ? options.b.has_value() : options.gamma.has_value();
  double slope = 0.0;
  if (slope_fixed) {
    slope = model == RateModel::Subexponential ? *options.b : rate.gamma;
  } else if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    const double x_mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double y_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
      sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    }
    // Envelopes decay; a nonnegative decay parameter is enforced.
    slope = sxx > 0.0 ? std::max(0.0, -sxy / sxx) : 0.0;
  }
  if (model == RateModel::Subexponential) {
    rate.b = slope;
  } else {
    rate.gamma = slope;
  }

  // Least a with a * shape(m_i) >= beta_i for every positive point.
  double log_a = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) log_a = std::max(log_a, ys[i] + slope * xs[i]);
  rate.a = std::exp(log_a);

  auto dominates = [&] {
    for (const auto& [m, beta] : betas) {
      if (rate.envelope(static_cast<double>(m)) < beta) return false;
    }
    return true;
  };
  for (int guard = 0; !dominates() && guard < 64; ++guard) {
    rate.a = std::nextafter(rate.a, std::numeric_limits<double>::infinity()) *
             (1.0 + 4.0 * std::numeric_limits<double>::epsilon());
  }
  if (!dominates()) throw DegenerateFit("fit_mixing_rate: could not reach pointwise dominance");
  return rate;
}

}  // namespace betamix
