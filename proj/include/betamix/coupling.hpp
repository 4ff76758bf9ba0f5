#pragma once

#include <cstddef>
#include <vector>

#include "betamix/pmf.hpp"

namespace betamix {

enum class CouplingKind {
  Pair,      // (V, W, W*) with W* independent of V
  Sequence,  // (V_1..V_N, V*_1..V*_N) with independent starred entries
};

// Axes of `extended_joint` are the original axes followed by the starred axes.
// Starred axis i is a copy-in-law of original axis starred_of[i].
struct CouplingResult {
  CouplingKind kind = CouplingKind::Pair;
  JointPmf extended_joint;
  std::size_t original_axes = 0;
  std::vector<std::size_t> starred_of;
  std::vector<double> mismatch_probs;  // P(original != starred), per starred axis

  // Marginal over the original axes.
  JointPmf original_marginal() const;
};

// Maximal coupling of each conditional law P(W | V = v) with the marginal law
// of W. The input is a two-axis joint of (V, W).
CouplingResult berbee_couple(const JointPmf& joint);

// Starred sequence built by backward induction from k = N: V*_k is coupled
// against (V_{1:k-1}, V*_{k+1:N}). V*_1 = V_1.
CouplingResult generalized_berbee(const JointPmf& process,
                                  std::size_t cell_cap = kDefaultCellCap);

struct CouplingReport {
  double original_marginal_error = 0.0;
  double starred_marginal_error = 0.0;
  double independence_error = 0.0;
  double mismatch_error = 0.0;

  double max() const;
};

// Exhaustive max-norm check of the coupling properties against `original`.
CouplingReport verify_coupling(const CouplingResult& result, const JointPmf& original);

// P(axis a != axis b) in a joint whose two axes share one alphabet.
double disagreement_probability(const JointPmf& joint, std::size_t a, std::size_t b);

}  // namespace betamix
