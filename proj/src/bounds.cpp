#include "betamix/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "betamix/error.hpp"

namespace betamix {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

void check_sizes(std::size_t n, std::size_t m) {
  require(n >= 1, "BoundParams: n must be positive");
  require(m >= 1 && m <= n, "BoundParams: m must satisfy 1 <= m <= n");
}

std::string format(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

const MixingRate& require_mixing(const BoundParams& params, RateModel model, const char* what) {
  if (!params.mixing || params.mixing->model != model) {
    throw DomainError(std::string(what) + ": requires " +
                      (model == RateModel::Subexponential ? "subexponential (a, b, gamma_mix)"
                                                          : "subpolynomial (a, gamma_mix)") +
                      " mixing parameters");
  }
  const MixingRate& rate = *params.mixing;
  require(rate.a > 0.0 && rate.gamma > 0.0, std::string(what) + ": a and gamma_mix must be positive");
  if (model == RateModel::Subexponential) require(rate.b > 0.0, std::string(what) + ": b must be positive");
  return rate;
}

double require_C(const BoundParams& params, const char* what) {
  if (!params.C) {
    throw DomainError(std::string(what) + ": the universal constant C has no default; supply it");
  }
  require(*params.C > 0.0, std::string(what) + ": C must be positive");
  return *params.C;
}

void check_rate_lambda(double lambda, const char* what) {
  if (!(lambda > 1.0) || lambda > rate_lambda_limit()) {
    throw HypothesisViolation(std::string(what) + ": requires 1 < lambda <= (3 + sqrt(1 + 8 sqrt(71)))/4 = " +
                              format(rate_lambda_limit()) + ", got lambda = " + format(lambda));
  }
}

}  // namespace

void BoundParams::validate_deviation() const {
  require(epsilon > 0.0 && epsilon < 1.0, "BoundParams: epsilon must lie in (0, 1)");
  require(c > 1.0, "BoundParams: c must exceed 1");
  require(gamma > 1.0, "BoundParams: gamma must exceed 1");
  require(gamma_prime > 1.0, "BoundParams: gamma_prime must exceed 1");
  require(B > 0.0 && std::isfinite(B), "BoundParams: B must be positive");
  check_sizes(n, m);
}

void BoundParams::validate_weak() const {
  require(c > 1.0 && std::isfinite(c), "BoundParams: c must exceed 1");
  require(lambda > 1.0 && std::isfinite(lambda), "BoundParams: lambda must exceed 1");
  require(B > 0.0 && std::isfinite(B), "BoundParams: B must be positive");
  require(V >= 1, "BoundParams: V must be positive");
  check_sizes(n, m);
}

UConstants u_constants(double c, double gamma_prime) {
  require(c > 1.0, "u_constants: c must exceed 1");
  require(gamma_prime > 1.0, "u_constants: gamma_prime must exceed 1");
  const double shrink = 1.0 - 1.0 / c;
  return {shrink / gamma_prime, shrink * shrink * (1.0 - 1.0 / gamma_prime)};
}

BoundFunction deviation_base(const BoundParams& params, const EntropyEstimate& entropy) {
  params.validate_deviation();
  const auto [u1, u2] = u_constants(params.c, params.gamma_prime);
  const double lead = 2.0 * params.gamma / (params.gamma - 1.0);
  const double eps = params.epsilon;
  const double B = params.B;
  const double c = params.c;
  const double gamma = params.gamma;
  BoundFunction f;
  f.evaluator = [=](std::size_t size, double t) {
    const double s = static_cast<double>(size);
    return lead * std::exp(-u2 * eps * s * t / (2.0 * B) + entropy(size, 0.5 * u1 * t));
  };
  f.validity_threshold = [=](std::size_t size) {
    return 0.5 * B * c * std::sqrt(gamma / static_cast<double>(size));
  };
  return f;
}

double indep_deviation_bound(const BoundParams& params, const EntropyEstimate& entropy,
                             std::size_t size, double t) {
  require(size >= 1, "indep_deviation_bound: size must be positive");
  require(t >= 0.0, "indep_deviation_bound: t must be nonnegative");
  return deviation_base(params, entropy)(size, t);
}

double beta_deviation_bound(const BoundParams& params, const EntropyEstimate& entropy, double t,
                            std::optional<double> beta_at_m, LiftForm form) {
  params.validate_deviation();
  double beta = 0.0;
  if (beta_at_m) {
    beta = *beta_at_m;
  } else if (params.mixing) {
    beta = std::min(1.0, params.mixing->envelope(static_cast<double>(params.m)));
  } else {
    throw DomainError("beta_deviation_bound: needs beta(m) or mixing parameters");
  }
  // |a| + |b| = (1 - eps) + (1 + eps).
  return lifted_bound(deviation_base(params, entropy), params.n, params.m, t, beta, 2.0 * params.B,
                      form);
}

ProofConstants proof_constants(double c, double lambda) {
  require(c > 1.0, "proof_constants: c must exceed 1");
  require(lambda > 1.0, "proof_constants: lambda must exceed 1");
  const double shrink = 1.0 - 1.0 / c;
  const double ratio = lambda / (lambda - 1.0);
  const double denom = shrink / 3.0 + (2.0 * lambda - 1.0) * ratio;
  return {2.0 * (c + 1.0) * (2.0 * c + 3.0),
          0.125 / (lambda * (c - 1.0) + 1.0) * shrink,
          0.5 / (denom * denom) * shrink * shrink * shrink * ratio};
}

double t0_threshold(double c, double lambda, std::size_t size) {
  require(c > 1.0 && lambda > 1.0, "t0_threshold: c and lambda must exceed 1");
  require(size >= 1, "t0_threshold: size must be positive");
  const double d = lambda - 1.0;
  const double s = static_cast<double>(size);
  const double disc = d * d + c * (c + 1.0) * lambda * lambda / s;
  // (sqrt(disc) - d)/2 rewritten to avoid cancellation for large sizes.
  return 0.5 * (disc - d * d) / (std::sqrt(disc) + d);
}

double a0_constant(double c, double lambda, std::size_t V, std::size_t size) {
  const auto [G0, G1, b] = proof_constants(c, lambda);
  (void)b;
  const double g = G1 * t0_threshold(c, lambda, size);
  const double e = std::numbers::e;
  return 3.0 * G0 * std::pow(e / g * std::log(3.0 * e / (2.0 * g)), static_cast<double>(V));
}

double theta0(double lambda, double c) {
  require(c > 1.0 && lambda > 1.0, "theta0: c and lambda must exceed 1");
  const double inner = (1.0 - 1.0 / c) * (1.0 - 1.0 / lambda) / 3.0 + (2.0 * lambda - 1.0);
  const double cr = c / (c - 1.0);
  return 32.0 * inner * inner * cr * cr * cr * lambda / (lambda - 1.0);
}

double theta1(double c, std::size_t m) {
  require(c > 1.0 && m >= 1, "theta1: c must exceed 1 and m be positive");
  return std::log(6.0 * (c + 1.0) * (2.0 * c + 3.0)) + std::log(static_cast<double>(m));
}

double theta2(double c, std::size_t n, std::size_t m) {
  require(c > 1.0, "theta2: c must exceed 1");
  check_sizes(n, m);
  const double q1 = static_cast<double>(n / m) + 1.0;
  return 1.0 + std::log(24.0) + std::log(1.0 + std::sqrt(1.0 + c * (c + 1.0) / q1)) -
         std::log(c - 1.0 / c) + std::log(q1);
}

void check_weak_error_hypotheses(double c, double lambda, std::size_t V, std::size_t n,
                                 std::size_t m) {
  const double lambda_max = (3.0 + std::sqrt(1.0 + 8.0 * c)) / 4.0;
  if (lambda > lambda_max) {
    throw HypothesisViolation("weak-error hypothesis lambda <= (3 + sqrt(1 + 8c))/4 fails: lambda = " +
                              format(lambda) + " > " + format(lambda_max) + " at c = " + format(c));
  }
  const double q = static_cast<double>(n / m);
  const double q_min = std::exp((c * c - 71.0) / (4.0 * static_cast<double>(V)));
  if (q < q_min) {
    throw HypothesisViolation("weak-error hypothesis floor(n/m) >= exp((c^2 - 71)/(4V)) fails: " +
                              format(q) + " < " + format(q_min));
  }
}

double weak_error_tail_bound(double c, double lambda, std::size_t V, std::size_t n, std::size_t m,
                             double t, double beta_at_m) {
  check_sizes(n, m);
  require(t >= 0.0, "weak_error_tail_bound: t must be nonnegative");
  require(beta_at_m >= 0.0 && beta_at_m <= 1.0, "weak_error_tail_bound: beta must lie in [0, 1]");
  if (t > 1.0 + lambda) return 0.0;
  const std::size_t q = n / m;
  double tail = 1.0;
  if (t >= t0_threshold(c, lambda, q)) {
    const double b = proof_constants(c, lambda).b;
    tail = static_cast<double>(m) * a0_constant(c, lambda, V, q + 1) *
           std::exp(-b * static_cast<double>(q) * t);
  }
  return std::clamp(static_cast<double>(n) * beta_at_m + tail, 0.0, 1.0);
}

WeakErrorBreakdown weak_error_bound(const BoundParams& params, double bias, double beta_at_m) {
  params.validate_weak();
  require(bias >= 0.0, "weak_error_bound: bias must be nonnegative");
  require(beta_at_m >= 0.0 && beta_at_m <= 1.0, "weak_error_bound: beta must lie in [0, 1]");
  check_weak_error_hypotheses(params.c, params.lambda, params.V, params.n, params.m);

  const double B2 = params.B * params.B;
  const double q = static_cast<double>(params.n / params.m);
  const double t2 = theta2(params.c, params.n, params.m);
  WeakErrorBreakdown out;
  out.variance_term = B2 / q * theta0(params.lambda, params.c) *
                      (1.0 + theta1(params.c, params.m) +
                       static_cast<double>(params.V) * (t2 + std::log(t2)));
  out.beta_error_term =
      16.0 * B2 * (1.0 + params.lambda) * static_cast<double>(params.n) * beta_at_m;
  out.scaled_bias_term = params.lambda * bias;
  out.total = out.variance_term + out.beta_error_term + out.scaled_bias_term;
  return out;
}

double rate_lambda_limit() { return (3.0 + std::sqrt(1.0 + 8.0 * std::sqrt(71.0))) / 4.0; }

double variance_slope(const BoundParams& params, double variance_constant) {
  require(variance_constant > 0.0, "variance_slope: the variance constant must be positive");
  require(params.lambda > 1.0, "variance_slope: lambda must exceed 1");
  require(params.n >= 1 && params.V >= 1 && params.B > 0.0, "variance_slope: bad n, V or B");
  const double n = static_cast<double>(params.n);
  return 2.0 * variance_constant * params.B * params.B * static_cast<double>(params.V) *
         (0.5 * std::log(71.0) + std::log(n)) / ((params.lambda - 1.0) * n);
}

ErrorCurve statistical_error_curve(const BoundParams& params, std::span<const double> x_grid,
                                   double variance_constant) {
  const MixingRate& rate =
      require_mixing(params, RateModel::Subexponential, "statistical_error_curve");
  const double alpha = variance_slope(params, variance_constant);
  const double n = static_cast<double>(params.n);
  const double g = rate.gamma;
  const double decay = rate.b / std::pow(2.0, g);
  auto curve = [&](double x) { return alpha * x + rate.a * n * std::exp(-decay * std::pow(x, g)); };

  ErrorCurve out;
  out.grid_value = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double x : x_grid) {
    if (!(x >= 2.0 && x <= n)) continue;
    any = true;
    const double v = curve(x);
    if (v < out.grid_value) {
      out.grid_value = v;
      out.grid_x = x;
    }
  }
  if (!any) throw DomainError("statistical_error_curve: no grid point lies in [2, n]");
  out.analytic_x = std::pow(2.0, 1.0 + 1.0 / g) * std::pow(std::log(n) / rate.b, 1.0 / g);
  out.analytic_value = curve(out.analytic_x);
  out.closed_form = out.analytic_x * alpha + rate.a / n;
  return out;
}

double subexp_rate(const BoundParams& params) {
  const MixingRate& rate = require_mixing(params, RateModel::Subexponential, "subexp_rate");
  const double C = require_C(params, "subexp_rate");
  check_rate_lambda(params.lambda, "subexp_rate");
  require(params.n >= 2 && params.V >= 1 && params.B > 0.0, "subexp_rate: bad n, V or B");
  const double n = static_cast<double>(params.n);
  const double block = std::pow(2.0 * std::log(n) / rate.b, 1.0 / rate.gamma);
  if (block < 1.0 || block > n / 2.0) {
    throw HypothesisViolation("subexp_rate: requires 1 <= (2 log n / b)^(1/gamma) <= n/2, got " +
                              format(block) + " with n = " + format(n));
  }
  const double spread = params.B * params.B * static_cast<double>(params.V) /
                        (params.lambda - 1.0) * (1.0 + std::log(n));
  return C / n * (spread + rate.a) * block;
}

double subpoly_rate(const BoundParams& params) {
  const MixingRate& rate = require_mixing(params, RateModel::Subpolynomial, "subpoly_rate");
  const double C = require_C(params, "subpoly_rate");
  require(rate.gamma > 1.0, "subpoly_rate: gamma_mix must exceed 1");
  check_rate_lambda(params.lambda, "subpoly_rate");
  require(params.n >= 1 && params.V >= 1 && params.B > 0.0, "subpoly_rate: bad n, V or B");
  const double n = static_cast<double>(params.n);
  const double spread = params.B * params.B * static_cast<double>(params.V) /
                        (params.lambda - 1.0) * (1.0 + std::log(n));
  return C * std::pow(n, -(rate.gamma - 1.0) / (rate.gamma + 1.0)) * (spread + rate.a);
}

SubpolyTradeoff subpoly_tradeoff(const BoundParams& params, double variance_constant) {
  const MixingRate& rate = require_mixing(params, RateModel::Subpolynomial, "subpoly_tradeoff");
  require(rate.gamma > 1.0, "subpoly_tradeoff: gamma_mix must exceed 1");
  const double alpha = variance_slope(params, variance_constant);
  const double n = static_cast<double>(params.n);
  SubpolyTradeoff out;
  out.x = std::ceil(std::pow(n, 2.0 / (rate.gamma + 1.0)));
  out.variance_part = alpha * out.x;
  out.mixing_part = rate.a * n * std::pow(out.x, -rate.gamma);
  return out;
}

}  // namespace betamix
