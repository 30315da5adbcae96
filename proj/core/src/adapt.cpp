#include "adaptqp/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "adaptqp/errors.hpp"

namespace adaptqp {

namespace {

Matrix augment_ones(const Matrix& features) {
  Matrix out(features.rows(), features.cols() + 1);
  out.leftCols(features.cols()) = features;
  out.col(features.cols()).setOnes();
  return out;
}

Matrix effective_target(const Dataset& target, bool augmented) {
  return augmented ? augment_ones(target.features) : target.features;
}

// +1/-1 one-vs-rest label table, n x K
Matrix signed_label_table(const std::vector<int>& labels, int k_max) {
  Matrix y(labels.size(), k_max);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int k = 1; k <= k_max; ++k) {
      y(static_cast<Eigen::Index>(i), k - 1) = labels[i] == k ? 1.0 : -1.0;
    }
  }
  return y;
}

double hinge(double margin) { return std::max(0.0, 1.0 - margin); }

void check_w_step_inputs(const Dataset& source, const Dataset& target,
                         const SvmModel& model, const PairWeights& pw,
                         const HyperParams& hp) {
  hp.validate();
  target.validate();
  if (model.dim() < 1) {
    throw std::invalid_argument("w-step: classifier model is empty");
  }
  if (hp.d_weight > 0.0) {
    source.validate();
    if (source.dim() != model.dim()) {
      throw std::invalid_argument(
          "w-step: source dimension does not match classifier dimension");
    }
    if (pw.weights.rows() != target.n_samples() ||
        pw.weights.cols() != source.n_samples()) {
      throw std::invalid_argument("w-step: pair-weight shape mismatch");
    }
  } else if (pw.weights.rows() != 0 &&
             pw.weights.rows() != target.n_samples()) {
    throw std::invalid_argument("w-step: pair-weight shape mismatch");
  }
}

}  // namespace

Vector apply_transform(const TransformMatrix& t, const Vector& x) {
  if (x.size() != t.target_dim()) {
    throw std::invalid_argument("apply_transform: feature dimension mismatch");
  }
  if (!t.augmented) return t.w * x;
  Vector xt(x.size() + 1);
  xt.head(x.size()) = x;
  xt[x.size()] = 1.0;
  return t.w * xt;
}

Matrix apply_transform(const TransformMatrix& t, const Matrix& features) {
  if (features.cols() != t.target_dim()) {
    throw std::invalid_argument("apply_transform: feature dimension mismatch");
  }
  const Matrix x = t.augmented ? augment_ones(features) : features;
  return x * t.w.transpose();
}

std::pair<DualSystem, BoxQp> mmdtl2_build_dual(const Dataset& source,
                                               const Dataset& target,
                                               const SvmModel& model,
                                               const PairWeights& pw,
                                               const HyperParams& hp,
                                               bool augmented) {
  check_w_step_inputs(source, target, model, pw, hp);
  const Eigen::Index n_t = target.n_samples();
  const int k_max = model.n_classes();
  const double d = hp.d_weight;

  const Matrix x_t = effective_target(target, augmented);
  const Eigen::Index m_t = x_t.cols();
  const Eigen::Index m_s = model.dim();

  PairWeights effective_pw = pw;
  if (effective_pw.weights.rows() == 0) {
    effective_pw.weights = Matrix::Zero(n_t, 0);
    effective_pw.row_sums = Vector::Zero(n_t);
  }

  DualSystem ds{
      Matrix(), Matrix(), Matrix(),
      SpdFactorization(compute_v_block(x_t, effective_pw, d)),
      Matrix::Zero(m_s, m_t), 0.0, augmented};

  // B^{-1} X_t' reused by every gram and linear entry below
  const Matrix binv_xt = ds.b_factor.solve(Matrix(x_t.transpose()));
  ds.gram_x = x_t * binv_xt;
  ds.gram_x = 0.5 * (ds.gram_x + ds.gram_x.transpose()).eval();
  ds.gram_theta = model.thetas * model.thetas.transpose();

  if (d > 0.0) {
    ds.p_matrix.noalias() = source.features.transpose() *
                            effective_pw.weights.transpose() * x_t;
    // 0.5 D sum_ij y_ij ||x_j^s||^2 - 0.5 D^2 tr(P B^{-1} P')
    const Vector col_weight = effective_pw.weights.colwise().sum();
    const Vector source_sq = source.features.rowwise().squaredNorm();
    const Matrix binv_pt = ds.b_factor.solve(Matrix(ds.p_matrix.transpose()));
    ds.constant_term = 0.5 * d * col_weight.dot(source_sq) -
                       0.5 * d * d *
                           ds.p_matrix.cwiseProduct(binv_pt.transpose()).sum();
  }
  // theta_k' P B^{-1} x_i, zero when D is
  ds.linear_base = d > 0.0
                       ? Matrix((model.thetas * ds.p_matrix * binv_xt).transpose())
                       : Matrix::Zero(n_t, k_max);

  const Matrix y = signed_label_table(target.labels, k_max);

  BoxQp qp;
  const Eigen::Index n_vars = n_t * k_max;
  qp.q.resize(n_vars, n_vars);
  // Q[(i,k1),(j,k2)] = y_ik1 y_jk2 (theta gram)(x gram); variable (i,k) sits
  // at index i*K + k-1
  for (Eigen::Index i = 0; i < n_t; ++i) {
    for (Eigen::Index j = 0; j < n_t; ++j) {
      const double gx = ds.gram_x(i, j);
      for (int k1 = 0; k1 < k_max; ++k1) {
        for (int k2 = 0; k2 < k_max; ++k2) {
          qp.q(i * k_max + k1, j * k_max + k2) =
              y(i, k1) * y(j, k2) * ds.gram_theta(k1, k2) * gx;
        }
      }
    }
  }
  qp.g.resize(n_vars);
  for (Eigen::Index i = 0; i < n_t; ++i) {
    for (int k = 0; k < k_max; ++k) {
      const double lin =
          1.0 - y(i, k) * (model.biases[k] + d * ds.linear_base(i, k));
      qp.g[i * k_max + k] = -lin;
    }
  }
  qp.lower = Vector::Zero(n_vars);
  qp.upper = Vector::Constant(n_vars, hp.c_target);
  return {std::move(ds), std::move(qp)};
}

TransformMatrix mmdtl2_recover_w(const DualSystem& ds, const Vector& a,
                                 const Dataset& target, const SvmModel& model,
                                 const PairWeights& pw, const HyperParams& hp) {
  const Eigen::Index n_t = target.n_samples();
  const int k_max = model.n_classes();
  if (a.size() != n_t * k_max) {
    throw std::invalid_argument("mmdtl2_recover_w: dual solution size mismatch");
  }
  const double slack = 1e-9 * (1.0 + hp.c_target);
  if ((a.array() < -slack).any() ||
      (a.array() > hp.c_target + slack).any()) {
    throw std::invalid_argument("mmdtl2_recover_w: dual solution out of box");
  }
  (void)pw;

  const Matrix x_t = effective_target(target, ds.augmented);
  const Matrix y = signed_label_table(target.labels, k_max);

  // coef(k,i) = a_{i,k} y_{i,k}
  Matrix coef(k_max, n_t);
  for (Eigen::Index i = 0; i < n_t; ++i) {
    for (int k = 0; k < k_max; ++k) {
      coef(k, i) = a[i * k_max + k] * y(i, k);
    }
  }
  Matrix rhs = model.thetas.transpose() * coef * x_t;  // sum a y theta x'
  if (hp.d_weight > 0.0) rhs.noalias() += hp.d_weight * ds.p_matrix;
  // W B = rhs, B symmetric
  TransformMatrix out;
  out.w = ds.b_factor.solve(Matrix(rhs.transpose())).transpose();
  out.augmented = ds.augmented;
  return out;
}

PrimalSystem mmdtl2_build_primal(const Dataset& source, const Dataset& target,
                                 const SvmModel& model, const PairWeights& pw,
                                 const HyperParams& hp, bool augmented) {
  check_w_step_inputs(source, target, model, pw, hp);
  const Eigen::Index n_t = target.n_samples();
  const int k_max = model.n_classes();
  const double d = hp.d_weight;
  const Matrix x_t = effective_target(target, augmented);
  const Eigen::Index m_t = x_t.cols();
  const Eigen::Index m_s = model.dim();

  const Eigen::Index n_w = m_s * m_t;
  const Eigen::Index n_xi = n_t * k_max;
  const Eigen::Index n_vars = n_w + n_xi;
  if (n_vars > 20000) {
    throw CapacityError(
        "mmdtl2_build_primal: " + std::to_string(n_vars) +
        " variables exceeds the primal guard (20000); use the dual path");
  }

  PairWeights effective_pw = pw;
  if (effective_pw.weights.rows() == 0) {
    effective_pw.weights = Matrix::Zero(n_t, 0);
    effective_pw.row_sums = Vector::Zero(n_t);
  }

  PrimalSystem ps;
  ps.source_dim = m_s;
  ps.target_dim = m_t;
  ps.augmented = augmented;

  const Matrix b_block = compute_v_block(x_t, effective_pw, d);
  ps.qp.h = Matrix::Zero(n_vars, n_vars);
  for (Eigen::Index r = 0; r < m_s; ++r) {
    ps.qp.h.block(r * m_t, r * m_t, m_t, m_t) = b_block;
  }

  Matrix p = Matrix::Zero(m_s, m_t);
  if (d > 0.0) {
    p.noalias() = source.features.transpose() *
                  effective_pw.weights.transpose() * x_t;
    const Vector col_weight = effective_pw.weights.colwise().sum();
    const Vector source_sq = source.features.rowwise().squaredNorm();
    ps.constant_term = 0.5 * d * col_weight.dot(source_sq);
  }
  ps.qp.f = Vector::Zero(n_vars);
  ps.qp.f.head(n_w) = -d * vec_row_major(p);
  ps.qp.f.tail(n_xi).setConstant(hp.c_target);

  // hinge rows: y_ik phi_k(x_i)' w + xi_ik >= 1 - y_ik b_k, with
  // phi_k(x)' w = theta_k' W x laid out row-major
  const Matrix y = signed_label_table(target.labels, k_max);
  ps.qp.a = Matrix::Zero(n_xi, n_vars);
  ps.qp.b = Vector::Zero(n_xi);
  for (Eigen::Index i = 0; i < n_t; ++i) {
    for (int k = 0; k < k_max; ++k) {
      const Eigen::Index row = i * k_max + k;
      for (Eigen::Index r = 0; r < m_s; ++r) {
        ps.qp.a.row(row).segment(r * m_t, m_t) =
            y(i, k) * model.thetas(k, r) * x_t.row(i);
      }
      ps.qp.a(row, n_w + row) = 1.0;
      ps.qp.b[row] = 1.0 - y(i, k) * model.biases[k];
    }
  }
  ps.qp.nonneg_mask = Eigen::VectorXi::Zero(n_vars);
  ps.qp.nonneg_mask.tail(n_xi).setOnes();
  return ps;
}

WStepResult mmdtl2_w_step(const Dataset& source, const Dataset& target,
                          const SvmModel& model, const PairWeights& pw,
                          const HyperParams& hp, bool augmented,
                          double qp_tol) {
  auto [ds, qp] = mmdtl2_build_dual(source, target, model, pw, hp, augmented);
  WStepResult out;
  out.qp = solve_box_qp(qp, qp_tol);
  out.transform =
      mmdtl2_recover_w(ds, out.qp.solution, target, model, pw, hp);
  out.dual_objective = -out.qp.objective + ds.constant_term;
  return out;
}

TransformMatrix mmdt_w_step(const Dataset& target, const SvmModel& model,
                            const HyperParams& hp, bool augmented) {
  HyperParams frobenius_only = hp;
  frobenius_only.d_weight = 0.0;
  Dataset empty_source;
  empty_source.features = Matrix::Zero(0, model.dim());
  empty_source.domain = Domain::Source;
  PairWeights no_pairs;
  no_pairs.weights = Matrix::Zero(target.n_samples(), 0);
  no_pairs.row_sums = Vector::Zero(target.n_samples());
  return mmdtl2_w_step(empty_source, target, model, no_pairs, frobenius_only,
                       augmented)
      .transform;
}

std::string to_string(AdaptMethod m) {
  return m == AdaptMethod::Mmdt ? "mmdt" : "mmdtl2";
}

AlternateResult alternate(const Dataset& source, const Dataset& target,
                          const HyperParams& hp, AdaptMethod method,
                          const AlternateOptions& opts) {
  hp.validate();
  source.validate();
  target.validate();
  std::set<int> source_classes(source.labels.begin(), source.labels.end());
  std::set<int> target_classes(target.labels.begin(), target.labels.end());
  if (source_classes != target_classes) {
    throw std::invalid_argument(
        "alternate: source and target must share the same class set");
  }

  const bool augmented =
      opts.augmented.value_or(method == AdaptMethod::Mmdt);
  const Eigen::Index m_s = source.dim();
  const Eigen::Index m_t_eff = target.dim() + (augmented ? 1 : 0);

  PairWeights pw;
  if (method == AdaptMethod::Mmdtl2 && hp.d_weight > 0.0) {
    pw = compute_pair_weights(source.labels, target.labels, opts.pair_mode);
  } else {
    pw.weights = Matrix::Zero(target.n_samples(), 0);
    pw.row_sums = Vector::Zero(target.n_samples());
  }

  AlternateResult res;
  res.transform.w = Matrix::Zero(m_s, m_t_eff);
  res.transform.augmented = augmented;

  const Eigen::Index n_s = source.n_samples();
  const Eigen::Index n_t = target.n_samples();
  Matrix train_x(n_s + n_t, m_s);
  train_x.topRows(n_s) = source.features;
  std::vector<int> train_labels = source.labels;
  train_labels.insert(train_labels.end(), target.labels.begin(),
                      target.labels.end());
  Vector penalties(n_s + n_t);
  penalties.head(n_s).setConstant(hp.c_source);
  penalties.tail(n_t).setConstant(hp.c_target);

  for (int iter = 0; iter < hp.max_outer_iters; ++iter) {
    train_x.bottomRows(n_t) = apply_transform(res.transform, target.features);
    res.model = train_ovr(train_x, train_labels, penalties);

    TransformMatrix next;
    if (method == AdaptMethod::Mmdt) {
      HyperParams frobenius_only = hp;
      frobenius_only.d_weight = 0.0;
      next = mmdtl2_w_step(source, target, res.model, pw, frobenius_only,
                           augmented, opts.qp_tol)
                 .transform;
    } else {
      next = mmdtl2_w_step(source, target, res.model, pw, hp, augmented,
                           opts.qp_tol)
                 .transform;
    }

    res.iterations = iter + 1;
    const double change = (next.w - res.transform.w).norm();
    const double scale = std::max(1.0, res.transform.w.norm());
    res.transform = std::move(next);
    res.objective_trace.push_back(
        composite_objective(source, target, res.model, pw, hp, res.transform,
                            method));
    if (change <= hp.w_tol * scale) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double w_step_objective(const Dataset& source, const Dataset& target,
                        const SvmModel& model, const PairWeights& pw,
                        const HyperParams& hp, const TransformMatrix& w) {
  const Matrix transformed = apply_transform(w, target.features);
  const int k_max = model.n_classes();
  double obj = 0.5 * w.w.squaredNorm();
  for (Eigen::Index i = 0; i < target.n_samples(); ++i) {
    const Vector values =
        decision_values(model, Vector(transformed.row(i).transpose()));
    for (int k = 1; k <= k_max; ++k) {
      const double y = target.labels[static_cast<std::size_t>(i)] == k ? 1.0 : -1.0;
      obj += hp.c_target * hinge(y * values[k - 1]);
    }
  }
  if (hp.d_weight > 0.0 && pw.weights.cols() > 0) {
    double dist = 0.0;
    for (Eigen::Index i = 0; i < pw.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < pw.weights.cols(); ++j) {
        if (pw.weights(i, j) == 0.0) continue;
        dist += pw.weights(i, j) *
                (transformed.row(i) - source.features.row(j)).squaredNorm();
      }
    }
    obj += 0.5 * hp.d_weight * dist;
  }
  return obj;
}

double composite_objective(const Dataset& source, const Dataset& target,
                           const SvmModel& model, const PairWeights& pw,
                           const HyperParams& hp, const TransformMatrix& w,
                           AdaptMethod method) {
  HyperParams effective = hp;
  if (method == AdaptMethod::Mmdt) effective.d_weight = 0.0;
  double obj =
      w_step_objective(source, target, model, pw, effective, w);
  obj += 0.5 * model.thetas.squaredNorm();
  const int k_max = model.n_classes();
  for (Eigen::Index i = 0; i < source.n_samples(); ++i) {
    const Vector values =
        decision_values(model, Vector(source.features.row(i).transpose()));
    for (int k = 1; k <= k_max; ++k) {
      const double y = source.labels[static_cast<std::size_t>(i)] == k ? 1.0 : -1.0;
      obj += hp.c_source * hinge(y * values[k - 1]);
    }
  }
  return obj;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = data;
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ParseError("model JSON: matrix payload size mismatch");
  }
  Matrix m(rows, cols);
  std::size_t pos = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[pos++];
  }
  return m;
}

}  // namespace

std::string model_to_json(const TransformMatrix& w, const SvmModel& m) {
  nlohmann::json j;
  j["transform"] = matrix_to_json(w.w);
  j["transform"]["augmented"] = w.augmented;
  j["svm"]["thetas"] = matrix_to_json(m.thetas);
  j["svm"]["biases"] = std::vector<double>(m.biases.data(),
                                           m.biases.data() + m.biases.size());
  return j.dump(2);
}

std::pair<TransformMatrix, SvmModel> model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  TransformMatrix w;
  w.w = matrix_from_json(j.at("transform"));
  w.augmented = j.at("transform").at("augmented").get<bool>();
  SvmModel m;
  m.thetas = matrix_from_json(j.at("svm").at("thetas"));
  const auto biases = j.at("svm").at("biases").get<std::vector<double>>();
  m.biases = Eigen::Map<const Vector>(biases.data(),
                                      static_cast<Eigen::Index>(biases.size()));
  return {std::move(w), std::move(m)};
}

void save_model(const TransformMatrix& w, const SvmModel& m,
                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_model: cannot open " + path);
  out << model_to_json(w, m) << "\n";
  if (!out) throw IoError("save_model: write failed for " + path);
}

std::pair<TransformMatrix, SvmModel> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_model: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace adaptqp
