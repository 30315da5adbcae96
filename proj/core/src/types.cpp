#include "adaptqp/types.hpp"

#include <algorithm>
#include <cmath>

namespace adaptqp {

std::string to_string(Domain d) {
  return d == Domain::Source ? "source" : "target";
}

int Dataset::n_classes() const {
  int k = 0;
  for (int label : labels) k = std::max(k, label);
  return k;
}

void Dataset::validate() const {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument(
        "Dataset: feature row count does not match label count");
  }
  if (features.cols() < 1) {
    throw std::invalid_argument("Dataset: feature dimension must be >= 1");
  }
  for (int label : labels) {
    if (label < 1) {
      throw std::invalid_argument("Dataset: labels must be 1-based class ids");
    }
  }
  if (!features.allFinite()) {
    throw std::invalid_argument("Dataset: features contain non-finite values");
  }
}

void HyperParams::validate() const {
  if (!(c_source > 0.0)) {
    throw std::invalid_argument("HyperParams: c_source must be > 0");
  }
  if (!(c_target > 0.0)) {
    throw std::invalid_argument("HyperParams: c_target must be > 0");
  }
  if (!(d_weight >= 0.0)) {
    throw std::invalid_argument("HyperParams: d_weight must be >= 0");
  }
  if (max_outer_iters < 1) {
    throw std::invalid_argument("HyperParams: max_outer_iters must be >= 1");
  }
  if (!(w_tol > 0.0)) {
    throw std::invalid_argument("HyperParams: w_tol must be > 0");
  }
}

Vector binarize_labels(const std::vector<int>& labels, int k) {
  int n_classes = 0;
  for (int label : labels) {
    if (label < 1) {
      throw std::invalid_argument("binarize_labels: labels must be >= 1");
    }
    n_classes = std::max(n_classes, label);
  }
  if (k < 1 || k > n_classes) {
    throw std::invalid_argument("binarize_labels: class id " +
                                std::to_string(k) + " outside {1.." +
                                std::to_string(n_classes) + "}");
  }
  Vector out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = labels[i] == k ? 1.0 : -1.0;
  }
  return out;
}

PairWeights compute_pair_weights(const std::vector<int>& source_labels,
                                 const std::vector<int>& target_labels,
                                 PairWeightMode mode) {
  if (source_labels.empty() || target_labels.empty()) {
    throw std::invalid_argument("compute_pair_weights: empty label vector");
  }
  int n_classes = 0;
  for (int label : source_labels) n_classes = std::max(n_classes, label);
  for (int label : target_labels) n_classes = std::max(n_classes, label);

  std::vector<double> source_count(n_classes + 1, 0.0);
  std::vector<double> target_count(n_classes + 1, 0.0);
  for (int label : source_labels) source_count[label] += 1.0;
  for (int label : target_labels) target_count[label] += 1.0;

  const auto n_t = static_cast<Eigen::Index>(target_labels.size());
  const auto n_s = static_cast<Eigen::Index>(source_labels.size());
  PairWeights pw;
  pw.weights = Matrix::Zero(n_t, n_s);
  for (Eigen::Index i = 0; i < n_t; ++i) {
    const int k = target_labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n_s; ++j) {
      if (source_labels[static_cast<std::size_t>(j)] != k) continue;
      pw.weights(i, j) = mode == PairWeightMode::Indicator
                             ? 1.0
                             : 1.0 / (target_count[k] * source_count[k]);
    }
  }
  pw.row_sums = pw.weights.rowwise().sum();
  return pw;
}

}  // namespace adaptqp
