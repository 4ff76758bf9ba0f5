#include "betamix/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "betamix/error.hpp"
#include "betamix/pmf.hpp"
#include "betamix/random.hpp"

namespace betamix {

void Dataset::validate() const {
  const std::size_t n = x.size();
  if (n == 0) throw MalformedInput("Dataset: no observations");
  if (y.size() != n) throw MalformedInput("Dataset: x and y differ in length");
  if (!states.empty() && states.size() != n) {
    throw MalformedInput("Dataset: one state per observation is required");
  }
  for (std::size_t s : states) {
    if (s >= support.size()) throw MalformedInput("Dataset: state outside the support");
  }
  if (marginals) {
    if (marginals->size() != n) throw MalformedInput("Dataset: one marginal law per index");
    for (const auto& row : *marginals) {
      if (row.size() != support.size()) throw MalformedInput("Dataset: marginal of wrong width");
    }
  }
  if (truth) {
    if (truth->size() != 1 && truth->size() != n) {
      throw MalformedInput("Dataset: truth needs one row or one row per index");
    }
    for (const auto& row : *truth) {
      if (row.size() != support.size()) throw MalformedInput("Dataset: truth row of wrong width");
    }
  }
  if (response_bound) {
    for (double v : y) {
      if (std::abs(v) > *response_bound * (1.0 + 1e-12)) {
        throw MalformedInput("Dataset: response exceeds the declared bound");
      }
    }
  }
}

double Dataset::phi(std::size_t k, std::size_t s) const {
  if (!truth) throw CapabilityError("Dataset: the true regression function is not available");
  return truth->size() == 1 ? (*truth)[0][s] : (*truth)[k][s];
}

double truncate(double value, double B) { return std::max(std::min(value, B), -B); }

double empirical_mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("empirical_mean: empty index set");
  return stable_sum(values) / static_cast<double>(values.size());
}

double average_mean(const Matrix& values, const Matrix& marginals) {
  if (marginals.empty()) throw DomainError("average_mean: empty index set");
  if (values.size() != 1 && values.size() != marginals.size()) {
    throw MalformedInput("average_mean: values need one row or one row per index");
  }
  std::vector<double> terms;
  terms.reserve(marginals.size());
  for (std::size_t j = 0; j < marginals.size(); ++j) {
    const auto& f = values.size() == 1 ? values[0] : values[j];
    if (f.size() != marginals[j].size()) throw MalformedInput("average_mean: width mismatch");
    double e = 0.0;
    for (std::size_t s = 0; s < f.size(); ++s) e += f[s] * marginals[j][s];
    terms.push_back(e);
  }
  return stable_sum(terms) / static_cast<double>(marginals.size());
}

double average_mean(const Dataset& data, const std::function<double(std::size_t, double)>& f) {
  if (!data.marginals) throw CapabilityError("average_mean: exact marginals are not available");
  Matrix values(data.size(), std::vector<double>(data.support.size()));
  for (std::size_t k = 0; k < data.size(); ++k)
    for (std::size_t s = 0; s < data.support.size(); ++s) values[k][s] = f(k, data.support[s]);
  return average_mean(values, *data.marginals);
}

double empirical_risk(const Dataset& data, const FunctionFamily::Function& f) {
  std::vector<double> sq(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double r = f(data.x[k]) - data.y[k];
    sq[k] = r * r;
  }
  return empirical_mean(sq);
}

namespace {

struct NormalSolution {
  Eigen::VectorXd coef;
  bool ridge = false;
};

NormalSolution solve_normal(Eigen::MatrixXd gram, const Eigen::VectorXd& rhs) {
  NormalSolution out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(top, 1.0))) {
    gram.diagonal().array() += kRidge;
    out.ridge = true;
  }
  out.coef = gram.ldlt().solve(rhs);
  return out;
}

FunctionFamily::Function span_member(const std::vector<FunctionFamily::Function>& basis,
                                     const Eigen::VectorXd& coef) {
  std::vector<double> c(coef.data(), coef.data() + coef.size());
  return [basis, c](double x) {
    double v = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) v += c[j] * basis[j](x);
    return v;
  };
}

FunctionFamily::Function truncated(FunctionFamily::Function f, double B) {
  return [f = std::move(f), B](double x) { return truncate(f(x), B); };
}

}  // namespace

RegressionResult fit_least_squares(const Dataset& data, const FunctionFamily& family, double B) {
  if (!(B > 0.0)) throw DomainError("fit_least_squares: B must be positive");
  if (data.size() == 0) throw DomainError("fit_least_squares: empty dataset");
  RegressionResult out;
  if (family.is_finite()) {
    if (family.members.empty()) throw DomainError("fit_least_squares: empty family");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < family.members.size(); ++i) {
      const double risk = empirical_risk(data, family.members[i]);
      if (risk < best) {
        best = risk;
        out.member = i;
      }
    }
    out.fitted = family.members[*out.member];
    out.empirical_risk = best;
  } else {
    const std::size_t d = family.basis.size();
    if (d == 0) throw DomainError("fit_least_squares: empty basis");
    Eigen::MatrixXd design(data.size(), d);
    for (std::size_t k = 0; k < data.size(); ++k)
      for (std::size_t j = 0; j < d; ++j) design(k, j) = family.basis[j](data.x[k]);
    const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), static_cast<Eigen::Index>(data.size()));
    const NormalSolution sol = solve_normal(design.transpose() * design, design.transpose() * y);
    out.coefficients.assign(sol.coef.data(), sol.coef.data() + d);
    out.ridge_used = sol.ridge;
    out.fitted = span_member(family.basis, sol.coef);
    out.empirical_risk = empirical_risk(data, out.fitted);
  }
  out.truncated = truncated(out.fitted, B);
  return out;
}

LossDifferenceFamily loss_difference_family(
    const FunctionFamily& family, double B,
    const std::function<double(std::size_t, double)>& truth) {
  if (!truth) throw CapabilityError("loss_difference_family: the true regression function is absent");
  if (!family.is_finite()) {
    throw CapabilityError("loss_difference_family: needs a finite family");
  }
  if (!(B > 0.0)) throw DomainError("loss_difference_family: B must be positive");
  LossDifferenceFamily out;
  out.range_bound = 4.0 * B * B;
  for (const auto& f : family.members) {
    out.members.emplace_back([f, B, truth](std::size_t k, double x, double y) {
      const double fit = y - truncate(f(x), B);
      const double best = y - truth(k, x);
      return fit * fit - best * best;
    });
  }
  return out;
}

double weak_error_of(const Dataset& data, const FunctionFamily::Function& f) {
  if (!data.marginals) throw CapabilityError("weak_error_of: exact marginals are not available");
  std::vector<double> at(data.support.size());
  for (std::size_t s = 0; s < at.size(); ++s) at[s] = f(data.support[s]);
  Matrix values(data.size(), std::vector<double>(at.size()));
  for (std::size_t k = 0; k < data.size(); ++k)
    for (std::size_t s = 0; s < at.size(); ++s) {
      const double r = at[s] - data.phi(k, s);
      values[k][s] = r * r;
    }
  return average_mean(values, *data.marginals);
}

double approximation_bias(const Dataset& data, const FunctionFamily& family) {
  if (!data.marginals) throw CapabilityError("approximation_bias: exact marginals are not available");
  if (family.is_finite()) {
    if (family.members.empty()) throw DomainError("approximation_bias: empty family");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : family.members) best = std::min(best, weak_error_of(data, f));
    return best;
  }
  // Weighted least squares over (index, state) cells with weight mu_k(s)/n.
  const std::size_t d = family.basis.size();
  const std::size_t S = data.support.size();
  const double n = static_cast<double>(data.size());
  Eigen::MatrixXd phi(S, d);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t j = 0; j < d; ++j) phi(s, j) = family.basis[j](data.support[s]);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (std::size_t k = 0; k < data.size(); ++k) {
    for (std::size_t s = 0; s < S; ++s) {
      const double w = (*data.marginals)[k][s] / n;
      if (w == 0.0) continue;
      gram += w * phi.row(s).transpose() * phi.row(s);
      rhs += w * data.phi(k, s) * phi.row(s).transpose();
    }
  }
  const NormalSolution sol = solve_normal(gram, rhs);
  return weak_error_of(data, span_member(family.basis, sol.coef));
}

WeakErrorEstimate weak_error(const std::function<Dataset(std::size_t)>& generator,
                             const FunctionFamily& family, double B, std::size_t replications,
                             std::size_t threads) {
  if (replications == 0) throw DomainError("weak_error: replications must be positive");
  std::vector<double> errors(replications);
  std::vector<char> ridge(replications, 0);
  parallel_for(replications, threads, [&](std::size_t i) {
    const Dataset data = generator(i);
    const RegressionResult fit = fit_least_squares(data, family, B);
    errors[i] = weak_error_of(data, fit.truncated);
    ridge[i] = fit.ridge_used ? 1 : 0;
  });

  WeakErrorEstimate out;
  out.replications = replications;
  out.mean = stable_sum(errors) / static_cast<double>(replications);
  if (replications > 1) {
    std::vector<double> dev(replications);
    for (std::size_t i = 0; i < replications; ++i) dev[i] = (errors[i] - out.mean) * (errors[i] - out.mean);
    const double var = stable_sum(dev) / static_cast<double>(replications - 1);
    out.std_error = std::sqrt(var / static_cast<double>(replications));
  }
  out.bias = approximation_bias(generator(0), family);
  out.ridge_fits = static_cast<std::size_t>(std::count(ridge.begin(), ridge.end(), 1));
  return out;
}

}  // namespace betamix
