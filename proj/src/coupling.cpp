#include "betamix/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "betamix/error.hpp"
#include "betamix/mixing.hpp"

namespace betamix {
namespace {

// Transition kernel K_v(w* | w) of the maximal coupling between P(W | V = v)
// and P(W), stored as kernel[(v * W + w) * W + w*].
std::vector<double> maximal_coupling_kernel(const JointPmf& pair) {
  const std::size_t rows = pair.axis_size(0);
  const std::size_t cols = pair.axis_size(1);
  const auto& p = pair.probs();

  std::vector<double> target_law(cols, 0.0);
  for (std::size_t v = 0; v < rows; ++v)
    for (std::size_t w = 0; w < cols; ++w) target_law[w] += p[v * cols + w];

  std::vector<double> kernel(rows * cols * cols, 0.0);
  std::vector<double> conditional(cols);
  std::vector<double> overlap(cols);
  std::vector<double> excess(cols);   // conditional mass above the target law
  std::vector<double> deficit(cols);  // target mass above the conditional law
  for (std::size_t v = 0; v < rows; ++v) {
    double* block = kernel.data() + v * cols * cols;
    const double row_mass = std::accumulate(p.begin() + v * cols, p.begin() + (v + 1) * cols, 0.0);
    if (row_mass <= 0.0) {
      // Null conditioning atom: diagonal by convention.
      for (std::size_t w = 0; w < cols; ++w) block[w * cols + w] = 1.0;
      continue;
    }
    for (std::size_t w = 0; w < cols; ++w) {
      conditional[w] = p[v * cols + w] / row_mass;
      overlap[w] = std::min(conditional[w], target_law[w]);
      excess[w] = conditional[w] - overlap[w];
      deficit[w] = target_law[w] - overlap[w];
    }
    const double deficit_total = std::accumulate(deficit.begin(), deficit.end(), 0.0);
    for (std::size_t w = 0; w < cols; ++w) {
      if (conditional[w] <= 0.0) {
        block[w * cols + w] = 1.0;
        continue;
      }
      // Row w of the coupling: overlap on the diagonal, excess spread
      // proportionally to the deficits.
      block[w * cols + w] = overlap[w] / conditional[w];
      if (excess[w] > 0.0 && deficit_total > 0.0) {
        const double scale = excess[w] / (conditional[w] * deficit_total);
        for (std::size_t u = 0; u < cols; ++u) block[w * cols + u] += scale * deficit[u];
      }
    }
  }
  return kernel;
}

// Appends a starred copy of axis `target`, coupled against `conditioning` and
// conditionally independent of every other axis given (conditioning, target).
JointPmf append_coupled_axis(const JointPmf& joint, const std::vector<std::size_t>& conditioning,
                             std::size_t target, std::size_t cell_cap) {
  const std::size_t width = joint.axis_size(target);
  const std::size_t cells = joint.cell_count() * width;

  std::vector<double> kernel;
  if (conditioning.empty()) {
    kernel.assign(width * width, 0.0);
    for (std::size_t w = 0; w < width; ++w) kernel[w * width + w] = 1.0;
  } else {
    const std::vector<std::vector<std::size_t>> groups{conditioning, {target}};
    kernel = maximal_coupling_kernel(joint.group(groups));
  }

  std::vector<double> out(cells, 0.0);
  const auto& p = joint.probs();
  for (std::size_t cell = 0; cell < p.size(); ++cell) {
    if (p[cell] == 0.0) continue;
    std::size_t v = 0;
    for (std::size_t a : conditioning) v = v * joint.axis_size(a) + joint.coordinate(cell, a);
    const std::size_t w = joint.coordinate(cell, target);
    const double* row = kernel.data() + (v * width + w) * width;
    for (std::size_t u = 0; u < width; ++u) out[cell * width + u] = p[cell] * row[u];
  }
  const double total = stable_sum(out);
  for (double& x : out) x /= total;

  auto axes = joint.axes();
  axes.push_back(joint.axes()[target]);
  return JointPmf(std::move(axes), std::move(out), cell_cap);
}

// max |P(A, B) - P(A) P(B)| over the grouped grid.
double factorization_error(const JointPmf& joint, const std::vector<std::size_t>& lhs,
                           const std::vector<std::size_t>& rhs) {
  const std::vector<std::vector<std::size_t>> groups{lhs, rhs};
  const JointPmf pair = joint.group(groups);
  const std::size_t rows = pair.axis_size(0);
  const std::size_t cols = pair.axis_size(1);
  std::vector<double> row_mass(rows, 0.0);
  std::vector<double> col_mass(cols, 0.0);
  const auto& p = pair.probs();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      row_mass[i] += p[i * cols + j];
      col_mass[j] += p[i * cols + j];
    }
  double worst = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      worst = std::max(worst, std::abs(p[i * cols + j] - row_mass[i] * col_mass[j]));
  return worst;
}

std::vector<std::size_t> iota_axes(std::size_t first, std::size_t count) {
  std::vector<std::size_t> axes(count);
  std::iota(axes.begin(), axes.end(), first);
  return axes;
}

}  // namespace

JointPmf CouplingResult::original_marginal() const {
  return extended_joint.marginal(iota_axes(0, original_axes));
}

double disagreement_probability(const JointPmf& joint, std::size_t a, std::size_t b) {
  if (joint.axes()[a] != joint.axes()[b]) {
    throw MalformedInput("disagreement_probability: axes have different alphabets");
  }
  std::vector<double> mass;
  const auto& p = joint.probs();
  for (std::size_t cell = 0; cell < p.size(); ++cell) {
    if (joint.coordinate(cell, a) != joint.coordinate(cell, b)) mass.push_back(p[cell]);
  }
  return stable_sum(mass);
}

CouplingResult berbee_couple(const JointPmf& joint) {
  if (joint.axis_count() != 2) {
    throw MalformedInput("berbee_couple: expected a joint of (V, W), got " +
                         std::to_string(joint.axis_count()) + " axes");
  }
  CouplingResult result{CouplingKind::Pair, append_coupled_axis(joint, {0}, 1, kDefaultCellCap),
                        2, {1}, {}};
  result.mismatch_probs.push_back(disagreement_probability(result.extended_joint, 1, 2));
  return result;
}

CouplingResult generalized_berbee(const JointPmf& process, std::size_t cell_cap) {
  const std::size_t n = process.axis_count();
  JointPmf current = process;
  std::vector<std::size_t> starred_axis(n + 1, 0);  // 1-based index -> axis position

  for (std::size_t k = n + 1; k-- > 1;) {
    const std::size_t growth = process.axis_size(k - 1);
    if (current.cell_count() > cell_cap / growth) {
      throw SizeError("generalized_berbee: the intermediate joint carrying V*_" +
                      std::to_string(k) + " would hold " +
                      std::to_string(current.cell_count()) + " x " + std::to_string(growth) +
                      " cells, exceeding the cap of " + std::to_string(cell_cap));
    }
    std::vector<std::size_t> conditioning;
    if (k >= 2) {
      conditioning = iota_axes(0, k - 1);
      for (std::size_t j = k + 1; j <= n; ++j) conditioning.push_back(starred_axis[j]);
    }
    // k = 1 has an empty conditioning set: V*_1 = V_1.
    current = append_coupled_axis(current, conditioning, k - 1, cell_cap);
    starred_axis[k] = current.axis_count() - 1;
  }

  std::vector<std::size_t> order = iota_axes(0, n);
  for (std::size_t k = 1; k <= n; ++k) order.push_back(starred_axis[k]);

  CouplingResult result{CouplingKind::Sequence, current.permute(order), n, iota_axes(0, n), {}};
  for (std::size_t k = 0; k < n; ++k) {
    result.mismatch_probs.push_back(disagreement_probability(result.extended_joint, k, n + k));
  }
  return result;
}

double CouplingReport::max() const {
  return std::max({original_marginal_error, starred_marginal_error, independence_error,
                   mismatch_error});
}

CouplingReport verify_coupling(const CouplingResult& result, const JointPmf& original) {
  const JointPmf& ext = result.extended_joint;
  const std::size_t base = result.original_axes;
  const std::size_t starred = result.starred_of.size();
  if (ext.axis_count() != base + starred || original.axis_count() != base ||
      result.mismatch_probs.size() != starred) {
    throw MalformedInput("verify_coupling: coupling result and original joint disagree in shape");
  }

  CouplingReport report;
  report.original_marginal_error = max_abs_difference(result.original_marginal(), original);

  for (std::size_t i = 0; i < starred; ++i) {
    const FinitePmf lhs = ext.marginal(base + i);
    const FinitePmf rhs = original.marginal(result.starred_of[i]);
    for (std::size_t a = 0; a < lhs.size(); ++a) {
      report.starred_marginal_error =
          std::max(report.starred_marginal_error, std::abs(lhs[a] - rhs[a]));
    }
  }

  for (std::size_t i = 0; i < starred; ++i) {
    const double observed = disagreement_probability(ext, result.starred_of[i], base + i);
    report.mismatch_error =
        std::max(report.mismatch_error, std::abs(observed - result.mismatch_probs[i]));
  }

  if (result.kind == CouplingKind::Pair) {
    const std::size_t coupled = result.starred_of[0];
    std::vector<std::size_t> conditioning;
    for (std::size_t a = 0; a < base; ++a)
      if (a != coupled) conditioning.push_back(a);
    report.independence_error = factorization_error(ext, conditioning, {base});
    const std::vector<std::vector<std::size_t>> groups{conditioning, {coupled}};
    const double beta = beta_coefficient(original.group(groups));
    report.mismatch_error =
        std::max(report.mismatch_error,
                 std::abs(disagreement_probability(ext, coupled, base) - beta));
    return report;
  }

  // Sequence: V_{1:k} independent of V*_{k+1:N}, starred entries independent,
  // and P(V_k != V*_k) = beta(sigma(V_{1:k-1}), sigma(V_k)).
  for (std::size_t k = 1; k < base; ++k) {
    report.independence_error =
        std::max(report.independence_error,
                 factorization_error(ext, iota_axes(0, k), iota_axes(base + k, base - k)));
  }
  if (base >= 2) {
    const JointPmf starred_law = ext.marginal(iota_axes(base, base));
    std::vector<FinitePmf> one_dim;
    for (std::size_t k = 0; k < base; ++k) one_dim.push_back(starred_law.marginal(k));
    report.independence_error = std::max(
        report.independence_error,
        max_abs_difference(starred_law, JointPmf::product(one_dim, starred_law.cell_count())));
  }
  const Process process(original);
  for (std::size_t k = 1; k <= base; ++k) {
    const double beta = k == 1 ? 0.0 : beta_m_dependence(process, 1, k);
    const double observed = disagreement_probability(ext, k - 1, base + k - 1);
    report.mismatch_error = std::max(report.mismatch_error, std::abs(observed - beta));
  }
  return report;
}

}  // namespace betamix
