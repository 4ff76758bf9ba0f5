#include "betamix/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "betamix/error.hpp"

namespace betamix {
namespace {

void check_labels(const std::vector<std::string>& labels, const char* what) {
  if (labels.empty()) {
    throw MalformedInput(std::string(what) + ": empty support");
  }
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) {
    throw MalformedInput(std::string(what) + ": support labels are not unique");
  }
}

}  // namespace

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double compensation = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

namespace {

void check_probs(const std::vector<double>& probs, const char* what) {
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw MalformedInput(std::string(what) + ": negative or non-finite probability");
    }
  }
  const double total = stable_sum(probs);
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw MalformedInput(std::string(what) + ": probabilities sum to " +
                         std::to_string(total) + ", not 1");
  }
}

std::vector<std::string> index_labels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

}  // namespace

FinitePmf::FinitePmf(std::vector<std::string> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  check_labels(support_, "FinitePmf");
  if (support_.size() != probs_.size()) {
    throw MalformedInput("FinitePmf: support and probability vectors differ in length");
  }
  check_probs(probs_, "FinitePmf");
}

FinitePmf FinitePmf::over_indices(std::vector<double> probs) {
  auto labels = index_labels(probs.size());
  return FinitePmf(std::move(labels), std::move(probs));
}

FinitePmf FinitePmf::uniform(std::size_t size) {
  if (size == 0) throw MalformedInput("FinitePmf: empty support");
  return over_indices(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

JointPmf::JointPmf(std::vector<Axis> axes, std::vector<double> probs, std::size_t cell_cap)
    : axes_(std::move(axes)), probs_(std::move(probs)) {
  if (axes_.empty()) throw MalformedInput("JointPmf: no axes");
  std::size_t cells = 1;
  for (const auto& axis : axes_) {
    check_labels(axis, "JointPmf axis");
    if (cells > cell_cap / axis.size()) {
      throw SizeError("JointPmf: product grid exceeds the cell cap of " +
                      std::to_string(cell_cap));
    }
    cells *= axis.size();
  }
  if (cells > cell_cap) {
    throw SizeError("JointPmf: " + std::to_string(cells) + " cells exceed the cell cap of " +
                    std::to_string(cell_cap));
  }
  if (probs_.size() != cells) {
    throw MalformedInput("JointPmf: expected " + std::to_string(cells) + " cells, got " +
                         std::to_string(probs_.size()));
  }
  check_probs(probs_, "JointPmf");
  strides_.assign(axes_.size(), 1);
  for (std::size_t a = axes_.size() - 1; a > 0; --a) {
    strides_[a - 1] = strides_[a] * axes_[a].size();
  }
}

JointPmf JointPmf::product(std::span<const FinitePmf> marginals, std::size_t cell_cap) {
  std::vector<Axis> axes;
  std::size_t cells = 1;
  for (const auto& m : marginals) {
    axes.push_back(m.support());
    if (cells > cell_cap / m.size()) {
      throw SizeError("JointPmf::product: grid exceeds the cell cap");
    }
    cells *= m.size();
  }
  std::vector<double> probs(cells, 1.0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t rest = cell;
    for (std::size_t a = marginals.size(); a-- > 0;) {
      probs[cell] *= marginals[a][rest % marginals[a].size()];
      rest /= marginals[a].size();
    }
  }
  return JointPmf(std::move(axes), std::move(probs), cell_cap);
}

double JointPmf::at(std::span<const std::size_t> index) const {
  return probs_[flat_index(index)];
}

std::size_t JointPmf::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != axes_.size()) throw MalformedInput("JointPmf: index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < index.size(); ++a) {
    if (index[a] >= axes_[a].size()) throw MalformedInput("JointPmf: index out of range");
    flat += index[a] * strides_[a];
  }
  return flat;
}

JointPmf JointPmf::marginal(std::span<const std::size_t> keep) const {
  std::vector<std::vector<std::size_t>> groups;
  groups.reserve(keep.size());
  for (std::size_t a : keep) groups.push_back({a});
  return group(groups);
}

FinitePmf JointPmf::marginal(std::size_t axis) const {
  if (axis >= axes_.size()) throw MalformedInput("JointPmf: axis out of range");
  std::vector<double> probs(axes_[axis].size(), 0.0);
  for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
    probs[coordinate(cell, axis)] += probs_[cell];
  }
  // Sums of a valid pmf stay within tolerance; renormalize the rounding away.
  const double total = stable_sum(probs);
  for (double& p : probs) p /= total;
  return FinitePmf(axes_[axis], std::move(probs));
}

JointPmf JointPmf::group(std::span<const std::vector<std::size_t>> groups) const {
  if (groups.empty()) throw MalformedInput("JointPmf::group: no groups");
  std::vector<bool> used(axes_.size(), false);
  for (const auto& g : groups) {
    if (g.empty()) throw MalformedInput("JointPmf::group: empty group");
    for (std::size_t a : g) {
      if (a >= axes_.size()) throw MalformedInput("JointPmf::group: axis out of range");
      if (used[a]) throw MalformedInput("JointPmf::group: axis listed twice");
      used[a] = true;
    }
  }

  std::vector<Axis> out_axes;
  std::vector<std::size_t> out_size;
  for (const auto& g : groups) {
    if (g.size() == 1) {
      out_axes.push_back(axes_[g[0]]);
    } else {
      std::size_t size = 1;
      for (std::size_t a : g) size *= axes_[a].size();
      Axis labels(size);
      for (std::size_t atom = 0; atom < size; ++atom) {
        std::size_t rest = atom;
        std::vector<std::string> parts(g.size());
        for (std::size_t i = g.size(); i-- > 0;) {
          parts[i] = axes_[g[i]][rest % axes_[g[i]].size()];
          rest /= axes_[g[i]].size();
        }
        std::string label = parts[0];
        for (std::size_t i = 1; i < parts.size(); ++i) label += "," + parts[i];
        labels[atom] = std::move(label);
      }
      out_axes.push_back(std::move(labels));
    }
    out_size.push_back(out_axes.back().size());
  }

  std::vector<std::size_t> out_strides(groups.size(), 1);
  for (std::size_t i = groups.size() - 1; i > 0; --i) {
    out_strides[i - 1] = out_strides[i] * out_size[i];
  }
  std::size_t out_cells = out_strides[0] * out_size[0];
  std::vector<double> out(out_cells, 0.0);
  for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
    if (probs_[cell] == 0.0) continue;
    std::size_t target = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      std::size_t atom = 0;
      for (std::size_t a : groups[i]) atom = atom * axes_[a].size() + coordinate(cell, a);
      target += atom * out_strides[i];
    }
    out[target] += probs_[cell];
  }
  const double total = stable_sum(out);
  for (double& p : out) p /= total;
  return JointPmf(std::move(out_axes), std::move(out), std::max(out_cells, kDefaultCellCap));
}

JointPmf JointPmf::permute(std::span<const std::size_t> order) const {
  if (order.size() != axes_.size()) {
    throw MalformedInput("JointPmf::permute: order must list every axis once");
  }
  return marginal(order);
}

double max_abs_difference(const JointPmf& lhs, const JointPmf& rhs) {
  if (lhs.axes() != rhs.axes()) throw MalformedInput("max_abs_difference: grids differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.cell_count(); ++i) {
    worst = std::max(worst, std::abs(lhs.probs()[i] - rhs.probs()[i]));
  }
  return worst;
}

}  // namespace betamix
