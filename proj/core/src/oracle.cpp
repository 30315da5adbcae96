#include "adaptqp/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "adaptqp/errors.hpp"
#include "adaptqp/numerics.hpp"
#include "adaptqp/qp.hpp"

namespace adaptqp::oracle {

Matrix materialize_full_v(const Matrix& target_features, const PairWeights& pw,
                          double d_weight, Eigen::Index m_s) {
  if (m_s < 1) {
    throw std::invalid_argument("materialize_full_v: m_s must be >= 1");
  }
  const Eigen::Index m_t = target_features.cols();
  if (m_s * m_t > 400) {
    throw CapacityError("materialize_full_v: system size " +
                        std::to_string(m_s * m_t) + " exceeds the guard (400)");
  }
  if (target_features.rows() != pw.weights.rows()) {
    throw std::invalid_argument(
        "materialize_full_v: target rows do not match pair weights");
  }
  Matrix v = Matrix::Identity(m_s * m_t, m_s * m_t);
  for (Eigen::Index i = 0; i < target_features.rows(); ++i) {
    // row sums recomputed from the raw weights on purpose: this path must
    // not trust the cached values it is meant to certify
    const double c_i = pw.weights.cols() > 0 ? pw.weights.row(i).sum() : 0.0;
    if (c_i == 0.0 || d_weight == 0.0) continue;
    v += d_weight * c_i *
         build_u(Vector(target_features.row(i).transpose()), m_s);
  }
  return v;
}

TransformMatrix primal_reference(const Dataset& source, const Dataset& target,
                                 const SvmModel& model, const PairWeights& pw,
                                 const HyperParams& hp, bool augmented,
                                 double tol) {
  PrimalSystem ps = mmdtl2_build_primal(source, target, model, pw, hp,
                                        augmented);
  InequalityQpResult res = solve_inequality_qp(ps.qp, tol);
  TransformMatrix out;
  out.w = unvec_row_major(res.solution.head(ps.source_dim * ps.target_dim),
                          ps.source_dim, ps.target_dim);
  out.augmented = augmented;
  return out;
}

std::string AuditReport::to_json() const {
  nlohmann::json j;
  j["max_abs_error"] = max_abs_error;
  j["kkt_residual"] = kkt_residual;
  j["duality_gap"] = duality_gap;
  j["passed"] = passed;
  j["details"] = nlohmann::json::array();
  for (const CheckResult& c : details) {
    j["details"].push_back({{"name", c.name},
                            {"value", c.value},
                            {"tolerance", c.tolerance},
                            {"passed", c.passed}});
  }
  return j.dump(2);
}

AuditReport audit_solution(const Dataset& source, const Dataset& target,
                           const SvmModel& model, const PairWeights& pw,
                           const HyperParams& hp, const TransformMatrix& w,
                           const Vector& a, const AuditTolerances& tols) {
  const Eigen::Index n_t = target.n_samples();
  const int k_max = model.n_classes();
  if (a.size() != n_t * k_max) {
    throw std::invalid_argument("audit_solution: dual solution size mismatch");
  }

  auto [ds, qp] = mmdtl2_build_dual(source, target, model, pw, hp,
                                    w.augmented);

  AuditReport report;
  auto add = [&report](const std::string& name, double value, double tol) {
    report.details.push_back({name, value, tol, value <= tol});
  };

  // (a) stationarity: W B - (sum a y theta x' + D P) = 0
  Matrix x_t = target.features;
  if (w.augmented) {
    x_t.conservativeResize(Eigen::NoChange, x_t.cols() + 1);
    x_t.col(x_t.cols() - 1).setOnes();
  }
  Matrix coef(k_max, n_t);
  for (Eigen::Index i = 0; i < n_t; ++i) {
    for (int k = 0; k < k_max; ++k) {
      const double y = target.labels[static_cast<std::size_t>(i)] == k + 1
                           ? 1.0 : -1.0;
      coef(k, i) = a[i * k_max + k] * y;
    }
  }
  Matrix rhs = model.thetas.transpose() * coef * x_t;
  if (hp.d_weight > 0.0) rhs.noalias() += hp.d_weight * ds.p_matrix;
  const Matrix b_block = ds.b_factor.factor() *
                         ds.b_factor.factor().transpose();
  const double rhs_scale = 1.0 + rhs.cwiseAbs().maxCoeff();
  const double stationarity =
      (w.w * b_block - rhs).cwiseAbs().maxCoeff() / rhs_scale;
  add("stationarity", stationarity, tols.stationarity);

  // (b) multiplier box feasibility
  double box_violation = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    box_violation = std::max(box_violation,
                             std::max(-a[i], a[i] - hp.c_target));
  }
  box_violation = std::max(box_violation, 0.0);
  add("box_feasibility", box_violation, tols.box);

  // (c) complementary slackness of both multiplier families, at the optimal
  // slacks xi = max(0, 1 - margin)
  const Matrix transformed = apply_transform(w, target.features);
  double cs_hinge = 0.0, cs_slack = 0.0;
  for (Eigen::Index i = 0; i < n_t; ++i) {
    const Vector values =
        decision_values(model, Vector(transformed.row(i).transpose()));
    for (int k = 0; k < k_max; ++k) {
      const double y = target.labels[static_cast<std::size_t>(i)] == k + 1
                           ? 1.0 : -1.0;
      const double margin = y * values[k];
      const double xi = std::max(0.0, 1.0 - margin);
      const double a_ik = a[i * k_max + k];
      cs_hinge = std::max(cs_hinge, std::abs(a_ik * (margin - 1.0 + xi)));
      cs_slack = std::max(cs_slack, std::abs((hp.c_target - a_ik) * xi));
    }
  }
  add("complementary_slackness_hinge", cs_hinge, tols.complementarity);
  add("complementary_slackness_nonneg", cs_slack, tols.complementarity);

  // (d) relative duality gap
  const double primal = w_step_objective(source, target, model, pw, hp, w);
  const double dual_min = 0.5 * a.dot(qp.q * a) + qp.g.dot(a);
  const double dual = -dual_min + ds.constant_term;
  const double gap = std::abs(primal - dual) / (1.0 + std::abs(primal));
  add("duality_gap", gap, tols.duality_gap);

  report.kkt_residual = std::max({stationarity, box_violation, cs_hinge,
                                  cs_slack});
  report.duality_gap = gap;
  report.max_abs_error = std::max(report.kkt_residual, gap);
  report.passed = std::all_of(report.details.begin(), report.details.end(),
                              [](const CheckResult& c) { return c.passed; });
  return report;
}

}  // namespace adaptqp::oracle
