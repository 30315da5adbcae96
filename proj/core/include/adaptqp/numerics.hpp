#pragma once

#include "adaptqp/types.hpp"

namespace adaptqp {

/// Flattens a matrix by concatenating its rows. Under this convention, for
/// any W, theta, x_t and x_s:
///   theta' W x_t          == vec(theta x_t') . vec(W)
///   ||W x_t||^2           == vec(W)' U(x_t) vec(W)
///   x_s' W x_t            == vec(x_s x_t') . vec(W)
/// which is what keeps the quadratic, linear and constraint carriers below
/// mutually consistent.
Vector vec_row_major(const Matrix& w);

/// Inverse of vec_row_major; exact (no arithmetic involved).
Matrix unvec_row_major(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Block-diagonal quadratic carrier: m_s identical blocks x x'. Satisfies
/// vec(W)' U(x) vec(W) == ||W x||^2 for every m_s x dim(x) matrix W.
Matrix build_u(const Vector& x, Eigen::Index m_s);

/// Linear carrier vec(x_s x_t'): satisfies build_v(x_s, x_t) . vec(W) ==
/// x_s' W x_t.
Vector build_v(const Vector& x_s, const Vector& x_t);

/// Cholesky factorization (no pivoting) of a symmetric positive-definite
/// matrix. Throws std::invalid_argument if the input is not symmetric within
/// 1e-10 relative, FactorizationError naming the offending pivot if a
/// non-positive pivot is hit.
class SpdFactorization {
 public:
  explicit SpdFactorization(const Matrix& b);

  Eigen::Index dim() const { return l_.rows(); }
  /// Lower-triangular factor L with B = L L'.
  const Matrix& factor() const { return l_; }

  /// Solves B x = rhs to a residual of ~1e-14 relative for well-conditioned B.
  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;

 private:
  Matrix l_;
};

inline SpdFactorization spd_factorize(const Matrix& b) {
  return SpdFactorization(b);
}

/// The repeated diagonal block of the dual system matrix:
///   B = I + d_weight * sum_i row_sums[i] * x_i x_i'
/// over the target feature rows. The full system matrix is blockdiag(B,...,B)
/// with one block per source dimension and is never materialized here; B is
/// SPD for any d_weight >= 0.
Matrix compute_v_block(const Matrix& target_features, const PairWeights& pw,
                       double d_weight);

}  // namespace adaptqp
