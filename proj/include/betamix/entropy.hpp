#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "betamix/mixing.hpp"

namespace betamix {

// A hypothesis class. Finite kinds enumerate `members`; the linear-span kind
// is described by its basis and fitted in closed form instead.
struct FunctionFamily {
  enum class Kind { ExplicitTable, LinearSpanTruncated, NeuralNet };
  using Function = std::function<double(double)>;

  Kind kind = Kind::ExplicitTable;
  std::vector<Function> members;
  std::vector<Function> basis;
  std::optional<std::size_t> declared_vc;
  std::optional<double> range_bound;

  bool is_finite() const { return kind != Kind::LinearSpanTruncated; }
  std::size_t size() const { return members.size(); }

  // values[member][point]; only for finite kinds.
  Matrix evaluate(std::span<const double> points) const;
};

// Member i maps point index x (0-based, integral) to values[i][x].
FunctionFamily explicit_table(Matrix values, std::optional<std::size_t> declared_vc = {});
// x -> B * 1{x <= threshold}.
FunctionFamily threshold_family(std::span<const double> thresholds, double B);
// Span of the basis, truncated at B when used as an estimator. The declared VC
// bound is dim + 1.
FunctionFamily linear_span(std::vector<FunctionFamily::Function> basis, double B);

// One-input network b0 + sum_k b_k * sigmoid(u_k x + a_k).
struct NetworkParams {
  double bias = 0.0;
  std::vector<double> weights;  // b_k
  std::vector<double> slopes;   // u_k
  std::vector<double> shifts;   // a_k
};
double logistic(double x);
FunctionFamily neural_net_family(std::span<const NetworkParams> networks, double B);

// Log covering-number bound lambda(size, r), valid for r in the interval.
struct EntropyEstimate {
  std::function<double(std::size_t size, double r)> evaluator;
  double valid_min = 0.0;  // exclusive
  double valid_max = 0.0;  // inclusive, may be infinite

  double operator()(std::size_t size, double r) const { return evaluator(size, r); }
};

struct Cover {
  std::size_t size = 0;
  std::vector<std::size_t> centers;
};

inline constexpr std::size_t kExactCoverLimit = 20;
inline constexpr double kCoverSlack = 1e-12;

// Pairwise empirical L1 distances (1/|J|) sum_j |g(z_j) - g'(z_j)|.
Matrix l1_distances(const Matrix& values);

// Minimum internal cover of a finite semimetric space: centers are members and
// member j is covered by i when dist[i][j] < r. Among minimum covers the
// lexicographically smallest center set is reported.
Cover minimum_cover(const Matrix& dist, double r, std::size_t limit = kExactCoverLimit);

std::size_t covering_number_exact(const Matrix& values, double r);
// Farthest-point greedy cover; an upper bound on covering_number_exact.
std::size_t covering_number_greedy(const Matrix& values, double r);

double sauer_shelah_entropy(std::size_t V, double B, double r);
double neural_net_entropy(std::size_t N, std::size_t d, double B, double r);
std::size_t vc_dimension_bound(std::size_t linear_dim);

EntropyEstimate sauer_shelah_estimate(std::size_t V, double B);
EntropyEstimate neural_net_estimate(std::size_t N, std::size_t d, double B);
// log |F| for a family with `members` elements; valid at every radius.
EntropyEstimate finite_family_estimate(std::size_t members);

}  // namespace betamix
