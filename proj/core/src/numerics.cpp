#include "adaptqp/numerics.hpp"

#include <cmath>

namespace adaptqp {

Vector vec_row_major(const Matrix& w) {
  Vector out(w.size());
  Eigen::Index pos = 0;
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    out.segment(pos, w.cols()) = w.row(r).transpose();
    pos += w.cols();
  }
  return out;
}

Matrix unvec_row_major(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw std::invalid_argument("unvec_row_major: size mismatch");
  }
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    out.row(r) = v.segment(r * cols, cols).transpose();
  }
  return out;
}

Matrix build_u(const Vector& x, Eigen::Index m_s) {
  if (m_s < 1) throw std::invalid_argument("build_u: m_s must be >= 1");
  const Eigen::Index d = x.size();
  Matrix outer = x * x.transpose();
  Matrix u = Matrix::Zero(m_s * d, m_s * d);
  for (Eigen::Index b = 0; b < m_s; ++b) {
    u.block(b * d, b * d, d, d) = outer;
  }
  return u;
}

Vector build_v(const Vector& x_s, const Vector& x_t) {
  return vec_row_major(x_s * x_t.transpose());
}

SpdFactorization::SpdFactorization(const Matrix& b) {
  if (b.rows() != b.cols()) {
    throw std::invalid_argument("SpdFactorization: matrix must be square");
  }
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("SpdFactorization: matrix is not symmetric");
  }
  const Eigen::Index n = b.rows();
  l_ = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = b(j, j) - l_.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw FactorizationError(
          "SpdFactorization: non-positive pivot at index " + std::to_string(j),
          static_cast<int>(j));
    }
    const double diag = std::sqrt(pivot);
    l_(j, j) = diag;
    if (j + 1 < n) {
      // column update: L(i,j) = (B(i,j) - L(i,:j).L(j,:j)) / L(j,j)
      l_.col(j).tail(n - j - 1) =
          (b.col(j).tail(n - j - 1) -
           l_.bottomLeftCorner(n - j - 1, j) * l_.row(j).head(j).transpose()) /
          diag;
    }
  }
}

Vector SpdFactorization::solve(const Vector& rhs) const {
  if (rhs.size() != dim()) {
    throw std::invalid_argument("SpdFactorization::solve: size mismatch");
  }
  Vector y = l_.triangularView<Eigen::Lower>().solve(rhs);
  return l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix SpdFactorization::solve(const Matrix& rhs) const {
  if (rhs.rows() != dim()) {
    throw std::invalid_argument("SpdFactorization::solve: size mismatch");
  }
  Matrix y = l_.triangularView<Eigen::Lower>().solve(rhs);
  return l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix compute_v_block(const Matrix& target_features, const PairWeights& pw,
                       double d_weight) {
  if (target_features.rows() != pw.row_sums.size()) {
    throw std::invalid_argument(
        "compute_v_block: target rows do not match pair-weight row sums");
  }
  if (d_weight < 0.0) {
    throw std::invalid_argument("compute_v_block: d_weight must be >= 0");
  }
  const Eigen::Index m_t = target_features.cols();
  Matrix b = Matrix::Identity(m_t, m_t);
  if (d_weight > 0.0 && target_features.rows() > 0) {
    // I + D * X' diag(c) X, c_i the cached pair-weight row sums
    b.noalias() += d_weight * target_features.transpose() *
                   pw.row_sums.asDiagonal() * target_features;
  }
  return b;
}

}  // namespace adaptqp
