#pragma once

#include "adaptqp/types.hpp"

namespace adaptqp {

/// One-vs-rest linear classifier bank: decision value of class k for sample x
/// is thetas.row(k-1) . x + biases[k-1].
struct SvmModel {
  Matrix thetas;  // K x dim
  Vector biases;  // K

  int n_classes() const { return static_cast<int>(thetas.rows()); }
  Eigen::Index dim() const { return thetas.cols(); }
};

/// Trains K one-vs-rest soft-margin linear SVMs. For class k the pair
/// (theta_k, b_k) minimizes
///   0.5 ||theta_k||^2 + sum_i c_i * hinge(y_{i,k} (theta_k . x_i + b_k))
/// with y_{i,k} = +1 iff labels[i] == k else -1 and per-sample penalties c_i.
///
/// The bias is exact: each binary problem is solved through its dual with the
/// equality constraint sum_i a_i y_{i,k} = 0 (SMO over maximal violating
/// pairs), not through feature augmentation. A class id <= K absent from
/// `labels` yields theta_k = 0, b_k = -1 (always rejected).
///
/// Throws DegenerateProblemError when labels contain fewer than two distinct
/// classes, std::invalid_argument on non-finite features or non-positive
/// penalties.
SvmModel train_ovr(const Matrix& features, const std::vector<int>& labels,
                   const Vector& per_sample_c, double tol = 1e-6,
                   int max_sweeps = 10000);

/// K decision values theta_k . x + b_k.
Vector decision_values(const SvmModel& m, const Vector& x);

/// argmax_k of decision_values; exact ties resolve to the smallest class id.
int predict(const SvmModel& m, const Vector& x);

std::vector<int> predict(const SvmModel& m, const Matrix& features);

/// Fraction of rows whose predicted class equals the given label.
double accuracy(const SvmModel& m, const Matrix& features,
                const std::vector<int>& labels);

}  // namespace adaptqp
