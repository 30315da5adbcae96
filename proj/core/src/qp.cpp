#include "adaptqp/qp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

#include "adaptqp/errors.hpp"

namespace adaptqp {

namespace {

void require_symmetric(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  }
  const double scale = std::max(1.0, m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0);
  if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
  }
}

}  // namespace

void BoxQp::validate() const {
  require_symmetric(q, "BoxQp");
  if (g.size() != q.rows() || lower.size() != g.size() ||
      upper.size() != g.size()) {
    throw std::invalid_argument("BoxQp: inconsistent sizes");
  }
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!(lower[i] <= upper[i])) {
      throw std::invalid_argument("BoxQp: lower > upper at index " +
                                  std::to_string(i));
    }
    if (q(i, i) < -1e-12) {
      throw std::invalid_argument("BoxQp: negative diagonal at index " +
                                  std::to_string(i));
    }
  }
}

BoxQpResult solve_box_qp(const BoxQp& p, double tol, int max_sweeps,
                         const std::optional<Vector>& initial) {
  p.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("solve_box_qp: tol must be > 0");
  const Eigen::Index n = p.size();
  if (max_sweeps <= 0) {
    max_sweeps = std::max<int>(1000, 10 * static_cast<int>(n));
  }

  Vector a(n);
  if (initial) {
    if (initial->size() != n) {
      throw std::invalid_argument("solve_box_qp: initial point size mismatch");
    }
    a = initial->cwiseMax(p.lower).cwiseMin(p.upper);
  } else {
    a = Vector::Zero(n).cwiseMax(p.lower).cwiseMin(p.upper);
  }

  Vector grad = p.q * a + p.g;

  auto kkt_residual = [&]() {
    double r = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double projected =
          std::clamp(a[i] - grad[i], p.lower[i], p.upper[i]);
      r = std::max(r, std::abs(projected - a[i]));
    }
    return r;
  };

  BoxQpResult res;
  res.kkt_residual = kkt_residual();
  int sweep = 0;
  while (res.kkt_residual > tol && sweep < max_sweeps) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double qii = p.q(i, i);
      double target;
      if (qii > 0.0) {
        target = std::clamp(a[i] - grad[i] / qii, p.lower[i], p.upper[i]);
      } else if (grad[i] > 0.0) {
        target = p.lower[i];
      } else if (grad[i] < 0.0) {
        target = p.upper[i];
      } else {
        continue;
      }
      if (!std::isfinite(target)) {
        throw std::runtime_error(
            "solve_box_qp: unbounded direction at index " + std::to_string(i));
      }
      const double delta = target - a[i];
      if (delta == 0.0) continue;
      a[i] = target;
      grad.noalias() += delta * p.q.col(i);
    }
    ++sweep;
    res.kkt_residual = kkt_residual();
  }

  res.solution = std::move(a);
  res.objective = 0.5 * res.solution.dot(p.q * res.solution) +
                  p.g.dot(res.solution);
  res.converged = res.kkt_residual <= tol;
  res.sweeps = sweep;
  return res;
}

Eigen::Index InequalityQp::n_constraints() const {
  Eigen::Index m = a.rows();
  if (nonneg_mask.size() > 0) m += (nonneg_mask.array() != 0).count();
  return m;
}

void InequalityQp::validate() const {
  require_symmetric(h, "InequalityQp");
  if (f.size() != h.rows()) {
    throw std::invalid_argument("InequalityQp: f size mismatch");
  }
  if (a.rows() != b.size()) {
    throw std::invalid_argument("InequalityQp: A rows do not match b");
  }
  if (a.rows() > 0 && a.cols() != f.size()) {
    throw std::invalid_argument("InequalityQp: A column count mismatch");
  }
  if (nonneg_mask.size() > 0 && nonneg_mask.size() != f.size()) {
    throw std::invalid_argument("InequalityQp: mask size mismatch");
  }
}

namespace {

// Constraint matrix C = [A; rows e_i for masked coords], applied implicitly
// so the identity rows are never materialized.
struct ConstraintOps {
  const InequalityQp& p;
  std::vector<Eigen::Index> mask_idx;

  explicit ConstraintOps(const InequalityQp& qp) : p(qp) {
    for (Eigen::Index i = 0; i < qp.nonneg_mask.size(); ++i) {
      if (qp.nonneg_mask[i] != 0) mask_idx.push_back(i);
    }
  }

  Eigen::Index rows() const {
    return p.a.rows() + static_cast<Eigen::Index>(mask_idx.size());
  }

  Vector apply(const Vector& z) const {  // C z - rhs
    Vector out(rows());
    if (p.a.rows() > 0) out.head(p.a.rows()) = p.a * z - p.b;
    for (std::size_t k = 0; k < mask_idx.size(); ++k) {
      out[p.a.rows() + static_cast<Eigen::Index>(k)] = z[mask_idx[k]];
    }
    return out;
  }

  Vector apply_linear(const Vector& z) const {  // C z
    Vector out(rows());
    if (p.a.rows() > 0) out.head(p.a.rows()) = p.a * z;
    for (std::size_t k = 0; k < mask_idx.size(); ++k) {
      out[p.a.rows() + static_cast<Eigen::Index>(k)] = z[mask_idx[k]];
    }
    return out;
  }

  Vector apply_transpose(const Vector& y) const {  // C' y
    Vector out = Vector::Zero(p.f.size());
    if (p.a.rows() > 0) out = p.a.transpose() * y.head(p.a.rows());
    for (std::size_t k = 0; k < mask_idx.size(); ++k) {
      out[mask_idx[k]] += y[p.a.rows() + static_cast<Eigen::Index>(k)];
    }
    return out;
  }

  // M = H + C' diag(d) C. Only the lower triangle is filled in; the LLT
  // below reads just that part.
  Matrix normal_matrix(const Vector& d) const {
    Matrix m = p.h;
    if (p.a.rows() > 0) {
      Matrix scaled = d.head(p.a.rows()).cwiseSqrt().asDiagonal() * p.a;
      m.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    }
    for (std::size_t k = 0; k < mask_idx.size(); ++k) {
      m(mask_idx[k], mask_idx[k]) +=
          d[p.a.rows() + static_cast<Eigen::Index>(k)];
    }
    return m;
  }
};

}  // namespace

InequalityQpResult solve_inequality_qp(const InequalityQp& p, double tol,
                                       int max_iterations) {
  p.validate();
  if (!(tol > 0.0)) {
    throw std::invalid_argument("solve_inequality_qp: tol must be > 0");
  }
  const Eigen::Index n = p.n_variables();
  ConstraintOps cons(p);
  const Eigen::Index m = cons.rows();

  InequalityQpResult res;
  if (m == 0) {
    // Unconstrained PSD minimization; LDLT handles the singular case.
    Eigen::LDLT<Matrix> ldlt(p.h);
    res.solution = ldlt.solve(-p.f);
    res.objective = 0.5 * res.solution.dot(p.h * res.solution) +
                    p.f.dot(res.solution);
    res.multipliers = Vector();
    res.kkt_residual = (p.h * res.solution + p.f).cwiseAbs().maxCoeff();
    res.converged = true;
    return res;
  }

  Vector z = Vector::Zero(n);
  Vector gap0 = cons.apply(z);
  Vector s = gap0.cwiseMax(1.0);
  Vector lambda = Vector::Ones(m);

  const double f_scale = 1.0 + (p.f.size() > 0 ? p.f.cwiseAbs().maxCoeff() : 0.0);
  const double b_scale =
      1.0 + (p.b.size() > 0 ? p.b.cwiseAbs().maxCoeff() : 0.0);

  auto max_step = [](const Vector& v, const Vector& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    }
    return alpha;
  };

  int iter = 0;
  double mu = s.dot(lambda) / static_cast<double>(m);
  for (; iter < max_iterations; ++iter) {
    Vector r_d = p.h * z + p.f - cons.apply_transpose(lambda);
    Vector r_p = cons.apply(z) - s;
    mu = s.dot(lambda) / static_cast<double>(m);

    const double obj = 0.5 * z.dot(p.h * z) + p.f.dot(z);
    const double stat = r_d.cwiseAbs().maxCoeff() / f_scale;
    const double feas = r_p.cwiseAbs().maxCoeff() / b_scale;
    const double comp = mu / (1.0 + std::abs(obj));
    res.kkt_residual = std::max({stat, feas, comp});
    if (res.kkt_residual <= tol) {
      res.converged = true;
      break;
    }
    if (lambda.cwiseAbs().maxCoeff() > 1e12 * f_scale && feas > 1e-6) {
      throw InfeasibleError(
          "solve_inequality_qp: diverging multipliers with persistent primal "
          "infeasibility");
    }

    Vector d = lambda.cwiseQuotient(s);
    Matrix normal = cons.normal_matrix(d);
    Eigen::LLT<Matrix> llt(normal);
    double ridge = 1e-12 * (1.0 + normal.diagonal().cwiseAbs().maxCoeff());
    while (llt.info() != Eigen::Success && ridge < 1e-2) {
      llt.compute(normal + ridge * Matrix::Identity(n, n));
      ridge *= 100.0;
    }
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(
          "solve_inequality_qp: normal matrix factorization failed");
    }

    struct Direction {
      Vector dz, ds, dl;
    };
    auto solve_newton = [&](const Vector& rc) {
      // rc is the target for S dLambda + Lambda dS = rc
      Direction dir;
      Vector rhs = -r_d + cons.apply_transpose(rc.cwiseQuotient(s) -
                                               d.cwiseProduct(r_p));
      dir.dz = llt.solve(rhs);
      dir.ds = cons.apply_linear(dir.dz) + r_p;
      dir.dl = (rc - lambda.cwiseProduct(dir.ds)).cwiseQuotient(s);
      return dir;
    };

    // affine (predictor) direction
    Vector rc_aff = -s.cwiseProduct(lambda);
    Direction aff = solve_newton(rc_aff);
    Vector& ds_aff = aff.ds;
    Vector& dl_aff = aff.dl;
    const double alpha_p_aff = max_step(s, ds_aff);
    const double alpha_d_aff = max_step(lambda, dl_aff);
    const double mu_aff =
        (s + alpha_p_aff * ds_aff).dot(lambda + alpha_d_aff * dl_aff) /
        static_cast<double>(m);
    const double sigma = std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3.0);

    // corrector
    Vector rc = -s.cwiseProduct(lambda) - ds_aff.cwiseProduct(dl_aff) +
                Vector::Constant(m, sigma * mu);
    Direction step = solve_newton(rc);

    const double eta = 0.995;
    const double alpha_p = std::min(1.0, eta * max_step(s, step.ds));
    const double alpha_d = std::min(1.0, eta * max_step(lambda, step.dl));

    z += alpha_p * step.dz;
    s += alpha_p * step.ds;
    lambda += alpha_d * step.dl;
    s = s.cwiseMax(1e-300);
    lambda = lambda.cwiseMax(1e-300);
  }

  res.solution = z;
  res.objective = 0.5 * z.dot(p.h * z) + p.f.dot(z);
  res.multipliers = lambda;
  res.iterations = iter;
  return res;
}

}  // namespace adaptqp
