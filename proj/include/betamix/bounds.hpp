#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "betamix/blocking.hpp"
#include "betamix/entropy.hpp"
#include "betamix/mixing.hpp"

namespace betamix {

struct BoundParams {
  double epsilon = 0.5;
  double c = 2.0;
  double gamma = 2.0;
  double gamma_prime = 2.0;
  double lambda = 1.5;
  double B = 1.0;
  std::size_t V = 1;
  std::size_t n = 1;
  std::size_t m = 1;
  std::optional<MixingRate> mixing;
  // Universal constant of the two rate corollaries; never defaulted.
  std::optional<double> C;

  // Field ranges used by the deviation bounds: epsilon, c, gamma, gamma_prime,
  // B, n, 1 <= m <= n.
  void validate_deviation() const;
  // c, lambda, B, V, n, 1 <= m <= n.
  void validate_weak() const;
};

struct UConstants {
  double u1 = 0.0;
  double u2 = 0.0;
};
UConstants u_constants(double c, double gamma_prime);

// The independent-case bound as a function of (|J|, t), including the
// validity threshold (Bc/2) sqrt(gamma / |J|).
BoundFunction deviation_base(const BoundParams& params, const EntropyEstimate& entropy);

// 1 below the threshold, else 2 gamma/(gamma-1) exp(-u2 eps size t/(2B) +
// lambda(size, u1 t/2)). Not clipped.
double indep_deviation_bound(const BoundParams& params, const EntropyEstimate& entropy,
                             std::size_t size, double t);

// Lifted over the m-steps partition of {1..n} with deviation cap 2B. Without
// an explicit beta the mixing envelope at m is used.
double beta_deviation_bound(const BoundParams& params, const EntropyEstimate& entropy, double t,
                            std::optional<double> beta_at_m = {},
                            LiftForm form = LiftForm::Coarse);

struct ProofConstants {
  double G0 = 0.0;
  double G1 = 0.0;
  double b = 0.0;
};
ProofConstants proof_constants(double c, double lambda);
double t0_threshold(double c, double lambda, std::size_t size);
double a0_constant(double c, double lambda, std::size_t V, std::size_t size);

double theta0(double lambda, double c);
double theta1(double c, std::size_t m);
double theta2(double c, std::size_t n, std::size_t m);

// Throws HypothesisViolation quoting the failed inequality.
void check_weak_error_hypotheses(double c, double lambda, std::size_t V, std::size_t n,
                                 std::size_t m);

// Tail of sup_f (Abar - lambda A) g_f for the normalized problem (B = 1/4):
// (n beta + L(n, m, t)) 1{t <= 1 + lambda}, clipped to [0, 1].
double weak_error_tail_bound(double c, double lambda, std::size_t V, std::size_t n, std::size_t m,
                             double t, double beta_at_m);

struct WeakErrorBreakdown {
  double variance_term = 0.0;
  double beta_error_term = 0.0;
  double scaled_bias_term = 0.0;
  double total = 0.0;
};
WeakErrorBreakdown weak_error_bound(const BoundParams& params, double bias, double beta_at_m);

// lambda-bound for the subexponential and subpolynomial rate corollaries.
double rate_lambda_limit();

// alpha = 2 C' B^2 V (log sqrt 71 + log n) / ((lambda - 1) n).
double variance_slope(const BoundParams& params, double variance_constant);

struct ErrorCurve {
  double grid_x = 0.0;
  double grid_value = 0.0;
  double analytic_x = 0.0;
  double analytic_value = 0.0;  // the curve evaluated at analytic_x
  double closed_form = 0.0;     // analytic_x * alpha + a / n
};
// Minimizes alpha x + a n exp(-(b / 2^gamma) x^gamma) over grid points in [2, n].
ErrorCurve statistical_error_curve(const BoundParams& params, std::span<const double> x_grid,
                                   double variance_constant);

double subexp_rate(const BoundParams& params);

struct SubpolyTradeoff {
  double x = 0.0;  // ceil(n^{2/(gamma+1)})
  double variance_part = 0.0;
  double mixing_part = 0.0;
};
double subpoly_rate(const BoundParams& params);
SubpolyTradeoff subpoly_tradeoff(const BoundParams& params, double variance_constant);

}  // namespace betamix
