#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "betamix/entropy.hpp"
#include "betamix/mixing.hpp"

namespace betamix {

// Observations (x_k, y_k), k = 1..n. Finite-state generators also record the
// visited state, the point of each state, and the exact per-index laws.
struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::size_t> states;
  std::vector<double> support;      // x value of state s
  std::optional<Matrix> marginals;  // marginals[k][s] = P(X_{k+1} = support[s])
  std::optional<Matrix> truth;      // Phi_{k+1}(support[s]); one row if stationary
  std::optional<double> response_bound;

  std::size_t size() const { return x.size(); }
  void validate() const;
  double phi(std::size_t k, std::size_t s) const;
};

double truncate(double value, double B);

// (1/|J|) sum_j values[j].
double empirical_mean(std::span<const double> values);
// (1/|J|) sum_j sum_s values[j][s] marginals[j][s]; a single values row is
// shared by every index.
double average_mean(const Matrix& values, const Matrix& marginals);
double average_mean(const Dataset& data, const std::function<double(std::size_t, double)>& f);

struct RegressionResult {
  FunctionFamily::Function fitted;
  FunctionFamily::Function truncated;
  std::optional<std::size_t> member;  // finite families
  std::vector<double> coefficients;   // linear spans
  bool ridge_used = false;
  double empirical_risk = 0.0;
};

inline constexpr double kRidge = 1e-10;

// Mean of |f(x_k) - y_k|^2.
double empirical_risk(const Dataset& data, const FunctionFamily::Function& f);

// Exhaustive argmin (first index wins ties) for finite families; normal
// equations for linear spans, with ridge kRidge when the design is singular.
RegressionResult fit_least_squares(const Dataset& data, const FunctionFamily& family, double B);

// g_f(k, x, y) = |y - T_B f(x)|^2 - |y - Phi_k(x)|^2 over the finite family.
struct LossDifferenceFamily {
  using Function = std::function<double(std::size_t k, double x, double y)>;
  std::vector<Function> members;
  double range_bound = 0.0;
};
LossDifferenceFamily loss_difference_family(
    const FunctionFamily& family, double B,
    const std::function<double(std::size_t, double)>& truth);

// Abar |f - Phi|^2 on the dataset's exact marginals.
double weak_error_of(const Dataset& data, const FunctionFamily::Function& f);
// inf_f Abar |f - Phi|^2: exhaustive for finite families, weighted least
// squares for linear spans.
double approximation_bias(const Dataset& data, const FunctionFamily& family);

struct WeakErrorEstimate {
  std::size_t replications = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double bias = 0.0;
  std::size_t ridge_fits = 0;
};

// Monte Carlo estimate of E[Abar |T_B fit - Phi|^2]. generator(i) must be a
// pure function of the replication index.
WeakErrorEstimate weak_error(const std::function<Dataset(std::size_t)>& generator,
                             const FunctionFamily& family, double B, std::size_t replications,
                             std::size_t threads = 1);

}  // namespace betamix
