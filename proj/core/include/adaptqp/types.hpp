#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "adaptqp/errors.hpp"

namespace adaptqp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Domain { Source, Target };

std::string to_string(Domain d);

/// A labeled sample set from one domain. Rows of `features` are samples,
/// `labels` are dense 1-based class ids. Immutable by convention after
/// construction; nothing here mutates shared state.
struct Dataset {
  Matrix features;          // n_samples x dim
  std::vector<int> labels;  // class ids in {1..K}
  Domain domain = Domain::Source;

  Eigen::Index n_samples() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }

  /// Largest class id present.
  int n_classes() const;

  /// Throws std::invalid_argument if any structural invariant is broken:
  /// row/label count mismatch, non-positive labels, dim < 1, or non-finite
  /// feature values.
  void validate() const;
};

/// Penalties and control knobs shared by the alternating estimation drivers.
struct HyperParams {
  double c_source = 1.0;   // slack penalty on source hinge terms
  double c_target = 1.0;   // slack penalty on target hinge terms
  double d_weight = 1.0;   // weight of the pairwise squared-distance term
  int max_outer_iters = 5;
  double w_tol = 1e-3;     // relative Frobenius-change stopping tolerance

  void validate() const;
};

enum class PairWeightMode { Indicator, ClassNormalized };

/// Non-negative weights between every (target, source) sample pair, plus the
/// cached per-target row sums used when assembling the distance term.
struct PairWeights {
  Matrix weights;   // n_T x n_S
  Vector row_sums;  // row_sums[i] == weights.row(i).sum()

  Eigen::Index n_target() const { return weights.rows(); }
  Eigen::Index n_source() const { return weights.cols(); }
};

/// Signed one-vs-rest view of a label vector: +1 where labels[i] == k, else
/// -1. Throws std::invalid_argument when k is outside {1..K}.
Vector binarize_labels(const std::vector<int>& labels, int k);

/// Class-matched pair weights. Indicator: 1 for same-class pairs.
/// ClassNormalized: 1 / (n_T^(k) * n_S^(k)) for same-class pairs of class k,
/// so every class shared by both domains contributes total weight 1.
PairWeights compute_pair_weights(const std::vector<int>& source_labels,
                                 const std::vector<int>& target_labels,
                                 PairWeightMode mode);

}  // namespace adaptqp
