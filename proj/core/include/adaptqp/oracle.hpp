#pragma once

#include <string>
#include <vector>

#include "adaptqp/adapt.hpp"
#include "adaptqp/types.hpp"

namespace adaptqp::oracle {

/// Literal materialization of the full system matrix
///   I + d_weight * sum_i (sum_j y_ij) U(x_i)
/// at size (m_s * M_T)^2, one build_u term per target row. Deliberately
/// naive; guarded at m_s * M_T <= 400 (CapacityError beyond).
Matrix materialize_full_v(const Matrix& target_features, const PairWeights& pw,
                          double d_weight, Eigen::Index m_s);

/// Ground-truth transform step: solves the explicit primal QP with the
/// general-purpose interior-point solver. Same guard as the primal builder.
TransformMatrix primal_reference(const Dataset& source, const Dataset& target,
                                 const SvmModel& model, const PairWeights& pw,
                                 const HyperParams& hp, bool augmented = false,
                                 double tol = 1e-9);

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct AuditTolerances {
  double stationarity = 1e-6;
  double box = 1e-9;
  double complementarity = 1e-6;
  double duality_gap = 1e-5;  // relative
};

struct AuditReport {
  double max_abs_error = 0.0;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  bool passed = false;
  std::vector<CheckResult> details;

  std::string to_json() const;
};

/// First-order audit of one transform step at (w, a): stationarity of the
/// Lagrangian in w, box feasibility of the multipliers, complementary
/// slackness of both multiplier families, and the relative duality gap.
/// Failures are report entries, never exceptions. Loosening any tolerance
/// can only turn a failing check into a passing one.
AuditReport audit_solution(const Dataset& source, const Dataset& target,
                           const SvmModel& model, const PairWeights& pw,
                           const HyperParams& hp, const TransformMatrix& w,
                           const Vector& a,
                           const AuditTolerances& tols = {});

}  // namespace adaptqp::oracle
