#include <doctest.h>

#include <random>

#include "adaptqp/errors.hpp"
#include "adaptqp/numerics.hpp"
#include "test_util.hpp"

using namespace adaptqp;
using testutil::random_matrix;
using testutil::random_spd;
using testutil::random_vector;

namespace {

// independent dense solve used to check the Cholesky path
Vector gaussian_elimination(Matrix a, Vector b) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    a.row(col).swap(a.row(pivot));
    std::swap(b[col], b[pivot]);
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      a.row(r).tail(n - col) -= f * a.row(col).tail(n - col);
      b[r] -= f * b[col];
    }
  }
  Vector x(n);
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    x[r] = (b[r] - a.row(r).tail(n - r - 1).dot(x.tail(n - r - 1))) / a(r, r);
  }
  return x;
}

}  // namespace

TEST_CASE("vec_row_major concatenates rows") {
  Matrix w(2, 2);
  w << 1, 2, 3, 4;
  Vector v = vec_row_major(w);
  CHECK(v[0] == 1);
  CHECK(v[1] == 2);
  CHECK(v[2] == 3);
  CHECK(v[3] == 4);
  CHECK(unvec_row_major(v, 2, 2) == w);

  Vector id = vec_row_major(Matrix::Identity(2, 2));
  CHECK(id[0] == 1);
  CHECK(id[1] == 0);
  CHECK(id[2] == 0);
  CHECK(id[3] == 1);

  CHECK(vec_row_major(Matrix::Zero(3, 2)).isZero(0.0));
}

TEST_CASE("vec/unvec round-trips exactly") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index r = 1 + t % 5, c = 1 + (t * 3) % 4;
    Matrix w = random_matrix(rng, r, c);
    CHECK(unvec_row_major(vec_row_major(w), r, c) == w);
  }
}

TEST_CASE("build_u trivial shapes") {
  Vector x(2);
  x << 1, 0;
  Matrix u = build_u(x, 2);
  REQUIRE(u.rows() == 4);
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 0) = 1;
  expected(2, 2) = 1;
  CHECK((u - expected).cwiseAbs().maxCoeff() == 0.0);

  CHECK(build_u(Vector::Zero(2), 3).isZero(0.0));
}

TEST_CASE("carrier identities: quadratic, linear and constraint forms") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index m_s = 1 + t % 4, m_t = 1 + (t * 7) % 4;
    Matrix w = random_matrix(rng, m_s, m_t);
    Vector x_t = random_vector(rng, m_t);
    Vector x_s = random_vector(rng, m_s);
    Vector theta = random_vector(rng, m_s);
    Vector wv = vec_row_major(w);

    const double quad = wv.dot(build_u(x_t, m_s) * wv);
    CHECK(quad == doctest::Approx((w * x_t).squaredNorm()).epsilon(1e-12));

    const double lin = build_v(x_s, x_t).dot(wv);
    CHECK(lin == doctest::Approx(x_s.dot(w * x_t)).epsilon(1e-12));

    const double phi = build_v(theta, x_t).dot(wv);
    CHECK(phi == doctest::Approx(theta.dot(w * x_t)).epsilon(1e-12));
  }
}

TEST_CASE("build_v outer-product layout") {
  Vector x_s(2), x_t(2);
  x_s << 1, 2;
  x_t << 3, 4;
  Vector v = build_v(x_s, x_t);
  CHECK(v[0] == 3);
  CHECK(v[1] == 4);
  CHECK(v[2] == 6);
  CHECK(v[3] == 8);
  CHECK(build_v(Vector::Zero(2), x_t).isZero(0.0));
}

TEST_CASE("spd factorization solves identity and diagonal systems exactly") {
  Vector rhs(2);
  rhs << 5, -3;
  SpdFactorization id(Matrix::Identity(2, 2));
  CHECK((id.solve(rhs) - rhs).cwiseAbs().maxCoeff() == 0.0);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  Vector rhs2(2);
  rhs2 << 4, 9;
  Vector x = SpdFactorization(d).solve(rhs2);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("spd solve matches naive gaussian elimination") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    Matrix b = random_spd(rng, 6);
    Vector rhs = random_vector(rng, 6);
    SpdFactorization f(b);
    Vector x = f.solve(rhs);
    Vector ref = gaussian_elimination(b, rhs);
    CHECK((x - ref).norm() <= 1e-8 * (1.0 + ref.norm()));
    CHECK((b * x - rhs).norm() <= 1e-8 * rhs.norm());
    // factor reconstructs the input
    CHECK((f.factor() * f.factor().transpose() - b).cwiseAbs().maxCoeff() <=
          1e-10 * b.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("spd factorization reports the failing pivot") {
  Matrix m = Matrix::Identity(3, 3);
  m(2, 2) = -1.0;
  try {
    SpdFactorization f(m);
    FAIL("expected FactorizationError");
  } catch (const FactorizationError& e) {
    CHECK(e.pivot_index() == 2);
  }
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(SpdFactorization(random_matrix(rng, 3, 3)),
                  std::invalid_argument);  // non-symmetric
}

TEST_CASE("compute_v_block: zero weight gives identity") {
  std::mt19937_64 rng(5);
  Matrix x = random_matrix(rng, 4, 3);
  PairWeights pw;
  pw.weights = Matrix::Ones(4, 2);
  pw.row_sums = pw.weights.rowwise().sum();
  Matrix b = compute_v_block(x, pw, 0.0);
  CHECK((b - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("compute_v_block: single unit target") {
  Matrix x(1, 2);
  x << 1, 0;
  PairWeights pw;
  pw.weights = Matrix::Ones(1, 1);
  pw.row_sums = Vector::Ones(1);
  Matrix b = compute_v_block(x, pw, 1.0);
  Matrix expected(2, 2);
  expected << 2, 0, 0, 1;
  CHECK((b - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("compute_v_block matches the literal block-diagonal sum") {
  std::mt19937_64 rng(17);
  const Eigen::Index m_s = 3, m_t = 3, n_t = 4;
  Matrix x = random_matrix(rng, n_t, m_t);
  PairWeights pw;
  pw.weights = random_matrix(rng, n_t, 5).cwiseAbs();
  pw.row_sums = pw.weights.rowwise().sum();
  const double d = 0.7;

  Matrix b = compute_v_block(x, pw, d);
  Matrix v = Matrix::Identity(m_s * m_t, m_s * m_t);
  for (Eigen::Index i = 0; i < n_t; ++i) {
    v += d * pw.weights.row(i).sum() *
         build_u(Vector(x.row(i).transpose()), m_s);
  }
  for (Eigen::Index r = 0; r < m_s; ++r) {
    CHECK((v.block(r * m_t, r * m_t, m_t, m_t) - b).cwiseAbs().maxCoeff() <=
          1e-12);
  }
}

TEST_CASE("compute_v_block is spd with spectrum bounded below by one") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 10; ++t) {
    Matrix x = random_matrix(rng, 5, 4);
    PairWeights pw;
    pw.weights = random_matrix(rng, 5, 3).cwiseAbs();
    pw.row_sums = pw.weights.rowwise().sum();
    Matrix b = compute_v_block(x, pw, 2.0);
    CHECK_NOTHROW(SpdFactorization{b});
    for (int s = 0; s < 5; ++s) {
      Vector z = random_vector(rng, 4);
      CHECK(z.dot(b * z) >= z.squaredNorm() * (1.0 - 1e-12));
    }
  }
}
