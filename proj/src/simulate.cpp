#include "betamix/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "betamix/error.hpp"
#include "betamix/random.hpp"

namespace betamix {
namespace {

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Law of the sum of `count` innovations.
std::vector<double> sum_law(const FinitePmf& innovation, std::size_t count) {
  std::vector<double> law{1.0};
  for (std::size_t i = 0; i < count; ++i) law = convolve(law, innovation.probs());
  return law;
}

std::vector<std::string> index_axis(std::size_t size) {
  std::vector<std::string> labels(size);
  for (std::size_t i = 0; i < size; ++i) labels[i] = std::to_string(i);
  return labels;
}

void normalize(std::vector<double>& p) {
  const double total = stable_sum(p);
  for (double& x : p) x /= total;
}

}  // namespace

std::string kind_name(GeneratorSpec::Kind kind) {
  switch (kind) {
    case GeneratorSpec::Kind::Markov:
      return "markov";
    case GeneratorSpec::Kind::MDependent:
      return "m-dependent";
    case GeneratorSpec::Kind::Iid:
      return "iid";
  }
  return "unknown";
}

std::size_t GeneratorSpec::state_count() const {
  switch (kind) {
    case Kind::Markov:
      return chain ? chain->size() : 0;
    case Kind::MDependent:
      return innovation ? dependence_lag * (innovation->size() - 1) + 1 : 0;
    case Kind::Iid:
      return law ? law->size() : 0;
  }
  return 0;
}

void GeneratorSpec::validate() const {
  switch (kind) {
    case Kind::Markov:
      if (!chain) throw MalformedInput("generator: markov kind needs a chain");
      chain->validate();
      break;
    case Kind::MDependent:
      if (!innovation) throw MalformedInput("generator: m-dependent kind needs an innovation law");
      if (dependence_lag == 0) throw MalformedInput("generator: dependence_lag must be positive");
      break;
    case Kind::Iid:
      if (!law) throw MalformedInput("generator: iid kind needs a law");
      break;
  }
  const std::size_t S = state_count();
  if (phi.empty()) throw MalformedInput("generator: missing response table phi");
  double phi_max = 0.0;
  for (const auto& row : phi) {
    if (row.size() != S) {
      throw MalformedInput("generator: phi rows need " + std::to_string(S) + " entries");
    }
    for (double v : row) {
      if (!std::isfinite(v)) throw MalformedInput("generator: non-finite phi");
      phi_max = std::max(phi_max, std::abs(v));
    }
  }
  if (noise_values.size() != noise_probs.size()) {
    throw MalformedInput("generator: noise values and probabilities differ in length");
  }
  double noise_max = 0.0;
  if (!noise_values.empty()) {
    const FinitePmf check = FinitePmf::over_indices(noise_probs);
    (void)check;
    double mean = 0.0;
    for (std::size_t i = 0; i < noise_values.size(); ++i) {
      mean += noise_values[i] * noise_probs[i];
      noise_max = std::max(noise_max, std::abs(noise_values[i]));
    }
    if (std::abs(mean) > 1e-12) {
      throw MalformedInput("generator: noise must have mean zero so that phi = E[Y|X]");
    }
  }
  if (!(response_bound > 0.0)) throw MalformedInput("generator: response_bound must be positive");
  if (phi_max + noise_max > response_bound * (1.0 + 1e-12)) {
    throw MalformedInput("generator: |phi| + |noise| exceeds response_bound");
  }
}

std::vector<std::size_t> generate_states(const GeneratorSpec& spec, std::size_t n,
                                         std::size_t replication) {
  spec.validate();
  Stream rng(spec.seed, replication);
  std::vector<std::size_t> x(n);
  switch (spec.kind) {
    case GeneratorSpec::Kind::Markov: {
      const auto& chain = *spec.chain;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] = k == 0 ? rng.discrete(chain.initial.probs()) : rng.discrete(chain.transition[x[k - 1]]);
      }
      break;
    }
    case GeneratorSpec::Kind::MDependent: {
      const std::size_t L = spec.dependence_lag;
      std::vector<std::size_t> xi(n + L - 1);
      for (auto& v : xi) v = rng.discrete(spec.innovation->probs());
      std::size_t window = std::accumulate(xi.begin(), xi.begin() + static_cast<long>(L), std::size_t{0});
      for (std::size_t k = 0; k < n; ++k) {
        x[k] = window;
        if (k + L < xi.size()) window = window + xi[k + L] - xi[k];
      }
      break;
    }
    case GeneratorSpec::Kind::Iid:
      for (auto& v : x) v = rng.discrete(spec.law->probs());
      break;
  }
  return x;
}

Dataset generate(const GeneratorSpec& spec, std::size_t n, std::size_t replication) {
  if (n == 0) throw DomainError("generate: n must be positive");
  if (spec.phi.size() != 1 && spec.phi.size() < n) {
    throw MalformedInput("generate: phi has fewer rows than observations");
  }
  Dataset data;
  data.states = generate_states(spec, n, replication);
  // Noise uses its own stream so the state path matches generate_states.
  Stream noise(spec.seed ^ 0x6e6f697365ULL, replication);
  const std::size_t S = spec.state_count();
  data.support.resize(S);
  std::iota(data.support.begin(), data.support.end(), 0.0);
  data.x.resize(n);
  data.y.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t s = data.states[k];
    const auto& row = spec.phi.size() == 1 ? spec.phi[0] : spec.phi[k];
    data.x[k] = static_cast<double>(s);
    data.y[k] = row[s];
    if (!spec.noise_values.empty()) data.y[k] += spec.noise_values[noise.discrete(spec.noise_probs)];
  }
  data.marginals = exact_marginals(spec, n);
  data.truth = spec.phi.size() == 1 ? spec.phi : Matrix(spec.phi.begin(), spec.phi.begin() + static_cast<long>(n));
  data.response_bound = spec.response_bound;
  return data;
}

Matrix exact_marginals(const GeneratorSpec& spec, std::size_t n) {
  spec.validate();
  Matrix out(n);
  switch (spec.kind) {
    case GeneratorSpec::Kind::Markov: {
      std::vector<double> mu = spec.chain->initial.probs();
      const auto& P = spec.chain->transition;
      for (std::size_t k = 0; k < n; ++k) {
        out[k] = mu;
        std::vector<double> next(mu.size(), 0.0);
        for (std::size_t i = 0; i < mu.size(); ++i)
          for (std::size_t j = 0; j < mu.size(); ++j) next[j] += mu[i] * P[i][j];
        mu = std::move(next);
      }
      break;
    }
    case GeneratorSpec::Kind::MDependent: {
      const auto law = sum_law(*spec.innovation, spec.dependence_lag);
      std::fill(out.begin(), out.end(), law);
      break;
    }
    case GeneratorSpec::Kind::Iid:
      std::fill(out.begin(), out.end(), spec.law->probs());
      break;
  }
  return out;
}

JointPmf process_law(const GeneratorSpec& spec, std::size_t n, std::size_t cell_cap) {
  spec.validate();
  if (n == 0) throw DomainError("process_law: n must be positive");
  const std::size_t S = spec.state_count();
  if (spec.kind == GeneratorSpec::Kind::Markov) return markov_process_law(*spec.chain, n, cell_cap);
  if (spec.kind == GeneratorSpec::Kind::Iid) {
    std::vector<FinitePmf> copies(n, FinitePmf::over_indices(spec.law->probs()));
    return JointPmf::product(copies, cell_cap);
  }

  const std::size_t L = spec.dependence_lag;
  const std::size_t K = spec.innovation->size();
  const std::size_t draws = n + L - 1;
  std::size_t cells = 1;
  std::size_t paths = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (cells > cell_cap / S) throw SizeError("process_law: law exceeds the cell cap");
    cells *= S;
  }
  for (std::size_t k = 0; k < draws; ++k) {
    if (paths > cell_cap / K) throw SizeError("process_law: too many innovation paths");
    paths *= K;
  }
  std::vector<double> probs(cells, 0.0);
  std::vector<std::size_t> xi(draws);
  for (std::size_t path = 0; path < paths; ++path) {
    std::size_t rest = path;
    double p = 1.0;
    for (std::size_t k = draws; k-- > 0;) {
      xi[k] = rest % K;
      rest /= K;
      p *= (*spec.innovation)[xi[k]];
    }
    if (p == 0.0) continue;
    std::size_t cell = 0;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t x = 0;
      for (std::size_t i = 0; i < L; ++i) x += xi[k + i];
      cell = cell * S + x;
    }
    probs[cell] += p;
  }
  normalize(probs);
  return JointPmf(std::vector<JointPmf::Axis>(n, index_axis(S)), std::move(probs), cell_cap);
}

double beta_envelope(const GeneratorSpec& spec, std::size_t m, std::size_t horizon) {
  spec.validate();
  if (m == 0) throw DomainError("beta_envelope: m must be positive");
  switch (spec.kind) {
    case GeneratorSpec::Kind::Iid:
      return 0.0;
    case GeneratorSpec::Kind::Markov:
      return markov_beta(*spec.chain, m, horizon).value;
    case GeneratorSpec::Kind::MDependent:
      break;
  }
  const std::size_t L = spec.dependence_lag;
  if (m >= L) return 0.0;
  // X_l = U + W with U the L - m innovations shared with the past.
  const auto shared = sum_law(*spec.innovation, L - m);
  const auto fresh = sum_law(*spec.innovation, m);
  const std::size_t S = spec.state_count();
  std::vector<double> joint(shared.size() * S, 0.0);
  for (std::size_t u = 0; u < shared.size(); ++u)
    for (std::size_t w = 0; w < fresh.size(); ++w) joint[u * S + u + w] += shared[u] * fresh[w];
  normalize(joint);
  return beta_coefficient(JointPmf({index_axis(shared.size()), index_axis(S)}, std::move(joint)));
}

TrajectorySampler make_sampler(const GeneratorSpec& spec, std::size_t n) {
  spec.validate();
  TrajectorySampler sampler;
  sampler.draw = [spec, n](std::size_t rep) { return generate_states(spec, n, rep); };
  sampler.marginals = exact_marginals(spec, n);
  return sampler;
}

double wilson_stderr(std::size_t hits, std::size_t trials) {
  if (trials == 0) throw DomainError("wilson_stderr: zero trials");
  const double R = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / R;
  return std::sqrt(p * (1.0 - p) / R + 0.25 / (R * R)) / (1.0 + 1.0 / R);
}

bool ExperimentReport::all_dominant() const {
  return std::all_of(deviation.begin(), deviation.end(), [](const auto& r) { return r.dominant; }) &&
         std::all_of(weak.begin(), weak.end(), [](const auto& r) { return r.dominant; });
}

ExperimentReport deviation_experiment(const GeneratorSpec& spec, const Matrix& family,
                                      const BoundParams& params, std::span<const double> t_grid,
                                      std::size_t replications, std::size_t threads,
                                      std::optional<EntropyEstimate> entropy,
                                      std::optional<double> beta_at_m) {
  spec.validate();
  params.validate_deviation();
  if (replications == 0) throw DomainError("deviation_experiment: replications must be positive");
  if (family.empty()) throw DomainError("deviation_experiment: empty family");
  const std::size_t S = spec.state_count();
  for (const auto& row : family) {
    if (row.size() != S) throw MalformedInput("deviation_experiment: family width differs from the state count");
    for (double v : row) {
      if (v < 0.0 || v > params.B) {
        throw MalformedInput("deviation_experiment: family values must lie in [0, B]");
      }
    }
  }
  const std::size_t n = params.n;
  const Matrix marginals = exact_marginals(spec, n);
  std::vector<double> average(family.size());
  for (std::size_t f = 0; f < family.size(); ++f) average[f] = average_mean({family[f]}, marginals);

  const double a = 1.0 - params.epsilon;
  const double b = 1.0 + params.epsilon;
  std::vector<double> statistic(replications);
  parallel_for(replications, threads, [&](std::size_t rep) {
    const auto path = generate_states(spec, n, rep);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < family.size(); ++f) {
      double sum = 0.0;
      for (std::size_t s : path) sum += family[f][s];
      best = std::max(best, a * sum / static_cast<double>(n) - b * average[f]);
    }
    statistic[rep] = best;
  });

  double beta = 0.0;
  if (beta_at_m) {
    beta = *beta_at_m;
  } else if (params.mixing) {
    beta = std::min(1.0, params.mixing->envelope(static_cast<double>(params.m)));
  } else {
    beta = beta_envelope(spec, params.m);
  }
  const EntropyEstimate lambda = entropy ? *entropy : finite_family_estimate(family.size());

  ExperimentReport report;
  report.generator = kind_name(spec.kind);
  report.seed = spec.seed;
  report.replications = replications;
  report.params = params;
  for (double t : t_grid) {
    const auto hits = static_cast<std::size_t>(
        std::count_if(statistic.begin(), statistic.end(), [t](double v) { return v >= t; }));
    DeviationRow row;
    row.n = n;
    row.m = params.m;
    row.t = t;
    row.frequency = static_cast<double>(hits) / static_cast<double>(replications);
    row.std_error = wilson_stderr(hits, replications);
    row.bound = beta_deviation_bound(params, lambda, t, beta);
    row.vacuous = row.bound >= 1.0;
    row.dominant = row.vacuous || row.frequency <= row.bound + 3.0 * row.std_error;
    row.resolved = row.vacuous || row.frequency + 3.0 * row.std_error <= row.bound;
    report.deviation.push_back(row);
  }
  return report;
}

ExperimentReport weak_error_experiment(const GeneratorSpec& spec, const FunctionFamily& family,
                                       const BoundParams& params,
                                       std::span<const std::size_t> n_grid,
                                       std::size_t replications, std::size_t threads) {
  spec.validate();
  if (n_grid.empty()) throw DomainError("weak_error_experiment: empty n grid");
  if (params.B < spec.response_bound) {
    throw DomainError("weak_error_experiment: B must dominate the response bound");
  }
  const double beta = params.mixing
                          ? std::min(1.0, params.mixing->envelope(static_cast<double>(params.m)))
                          : beta_envelope(spec, params.m);

  ExperimentReport report;
  report.generator = kind_name(spec.kind);
  report.seed = spec.seed;
  report.replications = replications;
  report.params = params;
  report.params.V = family.declared_vc.value_or(params.V);
  std::vector<double> ns;
  std::vector<double> errors;
  for (std::size_t n : n_grid) {
    BoundParams p = report.params;
    p.n = n;
    p.validate_weak();
    const auto estimate = weak_error(
        [&](std::size_t rep) { return generate(spec, n, rep); }, family, p.B, replications, threads);
    const WeakErrorBreakdown bound = weak_error_bound(p, estimate.bias, beta);
    WeakErrorRow row;
    row.n = n;
    row.m = p.m;
    row.replications = replications;
    row.weak_error = estimate.mean;
    row.std_error = estimate.std_error;
    row.bias = estimate.bias;
    row.bound_total = bound.total;
    row.bound_variance = bound.variance_term;
    row.bound_beta = bound.beta_error_term;
    row.beta_at_m = beta;
    row.dominant = row.weak_error <= row.bound_total + 3.0 * row.std_error;
    report.weak.push_back(row);
    ns.push_back(static_cast<double>(n));
    errors.push_back(estimate.mean);
  }
  report.slope = log_log_slope(ns, errors);
  return report;
}

std::optional<double> log_log_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const double k = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

}  // namespace betamix
