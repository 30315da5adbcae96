#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adaptqp/numerics.hpp"
#include "adaptqp/qp.hpp"
#include "adaptqp/svm.hpp"
#include "adaptqp/types.hpp"

namespace adaptqp {

/// Linear map from target feature space into source feature space. When
/// `augmented` is set the last column multiplies an implicit constant-1
/// coordinate appended to every target feature (a learned translation), so w
/// is source_dim x (target_dim + 1).
struct TransformMatrix {
  Matrix w;
  bool augmented = false;

  Eigen::Index source_dim() const { return w.rows(); }
  Eigen::Index target_dim() const { return w.cols() - (augmented ? 1 : 0); }
};

/// w applied to one target feature (the constant coordinate is appended
/// implicitly in augmented mode). Throws std::invalid_argument on dimension
/// mismatch.
Vector apply_transform(const TransformMatrix& t, const Vector& x);

/// Row-wise batch variant: returns one transformed row per input row.
Matrix apply_transform(const TransformMatrix& t, const Matrix& features);

/// Precomputed pieces of the dual system for one transform-estimation step.
/// The full system matrix blockdiag(B,...,B) never exists; everything routes
/// through the factorization of its single M_T x M_T block B.
struct DualSystem {
  Matrix gram_x;        // n_T x n_T, entries x_i' B^{-1} x_j
  Matrix gram_theta;    // K x K, entries theta_k1 . theta_k2
  Matrix linear_base;   // n_T x K, entries theta_k' P B^{-1} x_i
  SpdFactorization b_factor;
  Matrix p_matrix;      // M_S x M_T, sum_ij y_ij x_j^s (x_i^t)'
  double constant_term = 0.0;  // objective offset for duality checks
  bool augmented = false;
};

/// Builds the box-constrained dual of the transform step. The QP has one
/// variable a_{i,k} per target hinge constraint (index i*K + k-1), bounds
/// [0, c_target], Hessian
///   Q[(i,k1),(j,k2)] = y_{i,k1} y_{j,k2} (theta_k1 . theta_k2) (x_i' B^{-1} x_j)
/// and, in the minimization convention used by solve_box_qp, linear term
///   g_{i,k} = -(1 - y_{i,k} (b_k + D theta_k' P B^{-1} x_i)).
/// The bias enters because b_k is a fixed constant inside each hinge
/// constraint; dropping it would break primal/dual agreement whenever the
/// classifier has nonzero bias.
std::pair<DualSystem, BoxQp> mmdtl2_build_dual(const Dataset& source,
                                               const Dataset& target,
                                               const SvmModel& model,
                                               const PairWeights& pw,
                                               const HyperParams& hp,
                                               bool augmented = false);

/// Recovers the transform from a dual solution:
///   W = (sum_{i,k} a_{i,k} y_{i,k} theta_k x_i' + D P) B^{-1}.
TransformMatrix mmdtl2_recover_w(const DualSystem& ds, const Vector& a,
                                 const Dataset& target, const SvmModel& model,
                                 const PairWeights& pw, const HyperParams& hp);

/// The transform step written as one explicit inequality-constrained QP over
/// z = (vec(W), xi). Kept for small problems and verification; variable count
/// is guarded at 20000 (CapacityError directs callers to the dual path).
struct PrimalSystem {
  InequalityQp qp;
  double constant_term = 0.0;  // 0.5 D sum_ij y_ij ||x_j^s||^2 term
  Eigen::Index source_dim = 0;
  Eigen::Index target_dim = 0;  // effective (augmented) column count
  bool augmented = false;
};

PrimalSystem mmdtl2_build_primal(const Dataset& source, const Dataset& target,
                                 const SvmModel& model, const PairWeights& pw,
                                 const HyperParams& hp, bool augmented = false);

/// Dual-path transform step: build, solve, recover.
struct WStepResult {
  TransformMatrix transform;
  BoxQpResult qp;
  double dual_objective = 0.0;  // maximization value incl. constant term
};

WStepResult mmdtl2_w_step(const Dataset& source, const Dataset& target,
                          const SvmModel& model, const PairWeights& pw,
                          const HyperParams& hp, bool augmented = false,
                          double qp_tol = 1e-6);

/// Frobenius-regularized transform step with no distance term (the d_weight=0
/// special case of the machinery above, on bias-augmented target features by
/// default).
TransformMatrix mmdt_w_step(const Dataset& target, const SvmModel& model,
                            const HyperParams& hp, bool augmented = true);

enum class AdaptMethod { Mmdt, Mmdtl2 };

std::string to_string(AdaptMethod m);

struct AlternateOptions {
  /// Transform augmentation override; defaults to true for Mmdt and false
  /// for Mmdtl2.
  std::optional<bool> augmented;
  PairWeightMode pair_mode = PairWeightMode::ClassNormalized;
  double qp_tol = 1e-6;
};

struct AlternateResult {
  TransformMatrix transform;
  SvmModel model;
  std::vector<double> objective_trace;  // composite objective per iteration
  int iterations = 0;
  bool converged = false;  // stopped on the relative Frobenius-change test
};

/// Alternating estimation: starting from W = 0, repeat
///   (a) classifier step: train one-vs-rest SVMs on source rows (penalty
///       c_source) plus transformed target rows (penalty c_target);
///   (b) transform step per `method`
/// until ||W_new - W_old||_F <= w_tol * max(1, ||W_old||_F) or
/// max_outer_iters.
AlternateResult alternate(const Dataset& source, const Dataset& target,
                          const HyperParams& hp, AdaptMethod method,
                          const AlternateOptions& opts = {});

/// Transform-step objective at optimal slacks:
///   0.5 ||W||_F^2 + c_target * sum hinge + 0.5 D sum_ij y_ij ||W x_i - x_j||^2.
double w_step_objective(const Dataset& source, const Dataset& target,
                        const SvmModel& model, const PairWeights& pw,
                        const HyperParams& hp, const TransformMatrix& w);

/// Joint objective of transform and classifiers at optimal slacks (the
/// distance term only contributes for Mmdtl2).
double composite_objective(const Dataset& source, const Dataset& target,
                           const SvmModel& model, const PairWeights& pw,
                           const HyperParams& hp, const TransformMatrix& w,
                           AdaptMethod method);

/// Writes transform + classifier bank as one JSON document (explicit dims,
/// row-major arrays). load_model is the exact inverse.
void save_model(const TransformMatrix& w, const SvmModel& m,
                const std::string& path);
std::pair<TransformMatrix, SvmModel> load_model(const std::string& path);

std::string model_to_json(const TransformMatrix& w, const SvmModel& m);
std::pair<TransformMatrix, SvmModel> model_from_json(const std::string& text);

}  // namespace adaptqp
