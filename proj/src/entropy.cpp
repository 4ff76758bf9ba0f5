#include "betamix/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "betamix/error.hpp"

namespace betamix {

Matrix FunctionFamily::evaluate(std::span<const double> points) const {
  if (!is_finite()) {
    throw CapabilityError("FunctionFamily::evaluate: a linear span has no finite member list");
  }
  Matrix values(members.size(), std::vector<double>(points.size()));
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j) values[i][j] = members[i](points[j]);
  return values;
}

FunctionFamily explicit_table(Matrix values, std::optional<std::size_t> declared_vc) {
  if (values.empty()) throw MalformedInput("explicit_table: no members");
  const std::size_t points = values.front().size();
  if (points == 0) throw MalformedInput("explicit_table: no points");
  double range = 0.0;
  for (const auto& row : values) {
    if (row.size() != points) throw MalformedInput("explicit_table: ragged value matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw MalformedInput("explicit_table: non-finite value");
      range = std::max(range, std::abs(v));
    }
  }
  FunctionFamily family;
  family.kind = FunctionFamily::Kind::ExplicitTable;
  family.declared_vc = declared_vc;
  family.range_bound = range;
  for (std::size_t i = 0; i < values.size(); ++i) {
    family.members.emplace_back([row = values[i]](double x) {
      const double idx = std::round(x);
      if (idx != x || idx < 0.0 || idx >= static_cast<double>(row.size())) {
        throw MalformedInput("explicit_table: point " + std::to_string(x) +
                             " is not a table index");
      }
      return row[static_cast<std::size_t>(idx)];
    });
  }
  return family;
}

FunctionFamily threshold_family(std::span<const double> thresholds, double B) {
  if (thresholds.empty()) throw MalformedInput("threshold_family: no thresholds");
  if (!(B > 0.0)) throw DomainError("threshold_family: B must be positive");
  FunctionFamily family;
  family.kind = FunctionFamily::Kind::ExplicitTable;
  family.declared_vc = 1;
  family.range_bound = B;
  for (double theta : thresholds) {
    family.members.emplace_back([theta, B](double x) { return x <= theta ? B : 0.0; });
  }
  return family;
}

FunctionFamily linear_span(std::vector<FunctionFamily::Function> basis, double B) {
  if (basis.empty()) throw MalformedInput("linear_span: empty basis");
  if (!(B > 0.0)) throw DomainError("linear_span: B must be positive");
  FunctionFamily family;
  family.kind = FunctionFamily::Kind::LinearSpanTruncated;
  family.declared_vc = vc_dimension_bound(basis.size());
  family.range_bound = B;
  family.basis = std::move(basis);
  return family;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

FunctionFamily neural_net_family(std::span<const NetworkParams> networks, double B) {
  if (networks.empty()) throw MalformedInput("neural_net_family: no networks");
  if (!(B > 0.0)) throw DomainError("neural_net_family: B must be positive");
  FunctionFamily family;
  family.kind = FunctionFamily::Kind::NeuralNet;
  family.range_bound = B;
  for (const auto& net : networks) {
    const std::size_t width = net.weights.size();
    if (width == 0 || net.slopes.size() != width || net.shifts.size() != width) {
      throw MalformedInput("neural_net_family: inconsistent network shape");
    }
    double weight_norm = std::abs(net.bias);
    for (double w : net.weights) weight_norm += std::abs(w);
    if (weight_norm > B * (1.0 + 1e-12)) {
      throw MalformedInput("neural_net_family: sum of |b_k| exceeds B");
    }
    family.members.emplace_back([net](double x) {
      double out = net.bias;
      for (std::size_t k = 0; k < net.weights.size(); ++k) {
        out += net.weights[k] * logistic(net.slopes[k] * x + net.shifts[k]);
      }
      return out;
    });
  }
  return family;
}

Matrix l1_distances(const Matrix& values) {
  if (values.empty()) throw MalformedInput("l1_distances: empty family");
  const std::size_t points = values.front().size();
  if (points == 0) throw MalformedInput("l1_distances: no points");
  for (const auto& row : values) {
    if (row.size() != points) throw MalformedInput("l1_distances: ragged value matrix");
  }
  const std::size_t k = values.size();
  Matrix dist(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double sum = 0.0;
      for (std::size_t p = 0; p < points; ++p) sum += std::abs(values[i][p] - values[j][p]);
      dist[i][j] = dist[j][i] = sum / static_cast<double>(points);
    }
  }
  return dist;
}

namespace {

void check_radius(double r, const char* what) {
  if (!(r > 0.0)) throw DomainError(std::string(what) + ": radius must be positive");
}

bool covers(const Matrix& dist, std::size_t i, std::size_t j, double r) {
  return i == j || dist[i][j] <= r - kCoverSlack;
}

}  // namespace

Cover minimum_cover(const Matrix& dist, double r, std::size_t limit) {
  check_radius(r, "minimum_cover");
  const std::size_t k = dist.size();
  if (k == 0) throw MalformedInput("minimum_cover: empty family");
  if (k > limit || k > 32) {
    throw SizeError("minimum_cover: " + std::to_string(k) + " members exceed the exact limit of " +
                    std::to_string(std::min<std::size_t>(limit, 32)) +
                    "; use covering_number_greedy");
  }
  std::vector<std::uint32_t> reach(k, 0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (covers(dist, i, j, r)) reach[i] |= std::uint32_t{1} << j;
  const std::uint32_t full = k == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << k) - 1;

  // Subsets of each size in lexicographic order; the first full cover wins.
  for (std::size_t size = 1; size <= k; ++size) {
    std::vector<std::size_t> pick(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    while (true) {
      std::uint32_t mask = 0;
      for (std::size_t i : pick) mask |= reach[i];
      if (mask == full) return {size, pick};
      std::size_t pos = size;
      while (pos > 0 && pick[pos - 1] == k - size + pos - 1) --pos;
      if (pos == 0) break;
      ++pick[pos - 1];
      for (std::size_t i = pos; i < size; ++i) pick[i] = pick[i - 1] + 1;
    }
  }
  return {k, {}};  // unreachable: every member covers itself
}

std::size_t covering_number_exact(const Matrix& values, double r) {
  check_radius(r, "covering_number_exact");
  return minimum_cover(l1_distances(values), r).size;
}

std::size_t covering_number_greedy(const Matrix& values, double r) {
  check_radius(r, "covering_number_greedy");
  const Matrix dist = l1_distances(values);
  const std::size_t k = dist.size();
  std::vector<bool> covered(k, false);
  std::vector<double> gap(k, std::numeric_limits<double>::infinity());
  std::size_t centers = 0;
  std::size_t next = 0;
  while (true) {
    ++centers;
    for (std::size_t j = 0; j < k; ++j) {
      gap[j] = std::min(gap[j], dist[next][j]);
      if (covers(dist, next, j, r)) covered[j] = true;
    }
    double farthest = -1.0;
    bool done = true;
    for (std::size_t j = 0; j < k; ++j) {
      if (!covered[j] && gap[j] > farthest) {
        farthest = gap[j];
        next = j;
        done = false;
      }
    }
    if (done) return centers;
  }
}

double sauer_shelah_entropy(std::size_t V, double B, double r) {
  check_radius(r, "sauer_shelah_entropy");
  if (!(B > 0.0)) throw DomainError("sauer_shelah_entropy: B must be positive");
  if (r > B) return 0.0;
  const double scale = r > B / 4.0 ? 4.0 * B : B;
  const double log_ratio = std::log(scale / r);
  return std::log(3.0) + static_cast<double>(V) *
                             (1.0 + std::log(2.0) + log_ratio +
                              std::log(1.0 + std::log(3.0) + log_ratio));
}

double neural_net_entropy(std::size_t N, std::size_t d, double B, double r) {
  if (N == 0 || d == 0) throw DomainError("neural_net_entropy: N and d must be positive");
  if (!(B > 0.0)) throw DomainError("neural_net_entropy: B must be positive");
  if (!(r > 0.0) || !(r < B / 2.0)) {
    throw DomainError("neural_net_entropy: radius must lie in (0, B/2)");
  }
  const double n = static_cast<double>(N);
  const double dim = static_cast<double>(d);
  return ((2.0 * dim + 5.0) * n + 1.0) *
         (1.0 + std::log(12.0) + std::log(B / r) + std::log(n + 1.0));
}

std::size_t vc_dimension_bound(std::size_t linear_dim) {
  if (linear_dim == 0) throw DomainError("vc_dimension_bound: dimension must be positive");
  return linear_dim + 1;
}

EntropyEstimate sauer_shelah_estimate(std::size_t V, double B) {
  if (!(B > 0.0)) throw DomainError("sauer_shelah_estimate: B must be positive");
  return {[V, B](std::size_t, double r) { return sauer_shelah_entropy(V, B, r); }, 0.0, B / 4.0};
}

EntropyEstimate neural_net_estimate(std::size_t N, std::size_t d, double B) {
  if (!(B > 0.0)) throw DomainError("neural_net_estimate: B must be positive");
  return {[N, d, B](std::size_t, double r) { return neural_net_entropy(N, d, B, r); }, 0.0,
          B / 2.0};
}

EntropyEstimate finite_family_estimate(std::size_t members) {
  if (members == 0) throw DomainError("finite_family_estimate: empty family");
  const double value = std::log(static_cast<double>(members));
  return {[value](std::size_t, double) { return value; }, 0.0,
          std::numeric_limits<double>::infinity()};
}

}  // namespace betamix
