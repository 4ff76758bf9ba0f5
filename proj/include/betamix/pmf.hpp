#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace betamix {

inline constexpr double kProbabilityTolerance = 1e-12;
inline constexpr std::size_t kDefaultCellCap = 1'000'000;

// Probability mass function over a finite, labelled alphabet.
class FinitePmf {
 public:
  FinitePmf(std::vector<std::string> support, std::vector<double> probs);

  // Support labelled "0", "1", ... .
  static FinitePmf over_indices(std::vector<double> probs);
  static FinitePmf uniform(std::size_t size);

  const std::vector<std::string>& support() const { return support_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<std::string> support_;
  std::vector<double> probs_;
};

// Dense joint pmf over a finite product grid. Cells are stored row-major, with
// the last axis varying fastest.
class JointPmf {
 public:
  using Axis = std::vector<std::string>;

  JointPmf(std::vector<Axis> axes, std::vector<double> probs,
           std::size_t cell_cap = kDefaultCellCap);

  static JointPmf product(std::span<const FinitePmf> marginals,
                          std::size_t cell_cap = kDefaultCellCap);

  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t axis_count() const { return axes_.size(); }
  std::size_t axis_size(std::size_t axis) const { return axes_[axis].size(); }
  std::size_t cell_count() const { return probs_.size(); }
  const std::vector<std::size_t>& strides() const { return strides_; }

  double at(std::span<const std::size_t> index) const;
  std::size_t flat_index(std::span<const std::size_t> index) const;
  // Coordinate of `cell` along `axis`.
  std::size_t coordinate(std::size_t cell, std::size_t axis) const {
    return (cell / strides_[axis]) % axes_[axis].size();
  }

  // Joint law of the listed axes, in the listed order.
  JointPmf marginal(std::span<const std::size_t> keep) const;
  FinitePmf marginal(std::size_t axis) const;

  // Collapses each group of axes into a single axis whose atoms are tuples of
  // the original atoms (labels joined with ','). Axes not mentioned in any
  // group are summed out. Groups must be disjoint and nonempty.
  JointPmf group(std::span<const std::vector<std::size_t>> groups) const;

  // Reorders axes: result axis i is input axis order[i].
  JointPmf permute(std::span<const std::size_t> order) const;

 private:
  std::vector<Axis> axes_;
  std::vector<double> probs_;
  std::vector<std::size_t> strides_;
};

// Compensated (Neumaier) sum; dense grids can hold up to a million cells.
double stable_sum(std::span<const double> values);

// Absolute max-norm distance between two pmfs on identical grids.
double max_abs_difference(const JointPmf& lhs, const JointPmf& rhs);

}  // namespace betamix
