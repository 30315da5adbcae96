#include <doctest.h>

#include <random>

#include "adaptqp/errors.hpp"
#include "adaptqp/svm.hpp"
#include "test_util.hpp"

using namespace adaptqp;
using testutil::random_vector;

namespace {

double class_objective(const Matrix& x, const std::vector<int>& labels,
                       const Vector& c, int k, const Vector& theta, double b) {
  double obj = 0.5 * theta.squaredNorm();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double y = labels[static_cast<std::size_t>(i)] == k ? 1.0 : -1.0;
    const double margin = y * (theta.dot(x.row(i)) + b);
    obj += c[i] * std::max(0.0, 1.0 - margin);
  }
  return obj;
}

}  // namespace

TEST_CASE("symmetric separable pair recovers the max-margin hyperplane") {
  Matrix x(2, 1);
  x << -1.0, 1.0;
  const std::vector<int> labels = {1, 2};
  const Vector c = Vector::Constant(2, 1e6);
  SvmModel m = train_ovr(x, labels, c);

  CHECK(m.thetas(1, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(m.biases[1] == doctest::Approx(0.0).epsilon(1e-6));
  // sign-mirrored problem for class 1
  CHECK(m.thetas(0, 0) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(m.biases[0] == doctest::Approx(0.0).epsilon(1e-6));
  // margin points sit at +-1
  CHECK(m.thetas(1, 0) * 1.0 + m.biases[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(predict(m, Vector(x.row(0).transpose())) == 1);
  CHECK(predict(m, Vector(x.row(1).transpose())) == 2);
}

TEST_CASE("random separable 2-d set trains to full accuracy") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> gauss(0.0, 0.4);
  Matrix x(40, 2);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const int cls = i % 2;
    x(i, 0) = (cls == 0 ? -3.0 : 3.0) + gauss(rng);
    x(i, 1) = gauss(rng);
    labels.push_back(cls + 1);
  }
  SvmModel m = train_ovr(x, labels, Vector::Constant(40, 1e4));
  CHECK(accuracy(m, x, labels) == 1.0);
}

TEST_CASE("decision values and tie-breaking") {
  SvmModel m;
  m.thetas.resize(2, 2);
  m.thetas << 1, 0, -1, 0;
  m.biases = Vector::Zero(2);
  Vector x(2);
  x << 2, 5;
  Vector values = decision_values(m, x);
  CHECK(values[0] == 2.0);
  CHECK(values[1] == -2.0);
  CHECK(predict(m, x) == 1);

  CHECK(predict(m, Vector(Vector::Zero(2))) == 1);  // exact tie goes to class 1

  Vector bad(3);
  CHECK_THROWS_AS(decision_values(m, bad), std::invalid_argument);
}

TEST_CASE("argmax prediction ignores a common shift of all decision values") {
  SvmModel m;
  m.thetas.resize(3, 2);
  m.thetas << 1, 0, 0, 1, -1, -1;
  m.biases.resize(3);
  m.biases << 0.3, -0.2, 0.1;
  SvmModel shifted = m;
  shifted.biases.array() += 5.0;
  std::mt19937_64 rng(67);
  for (int t = 0; t < 25; ++t) {
    Vector x = random_vector(rng, 2);
    CHECK(predict(m, x) == predict(shifted, x));
  }
}

TEST_CASE("trained hyperplanes are local minimizers of the hinge objective") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(30, 3);
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    for (int c = 0; c < 3; ++c) x(i, c) = gauss(rng) + (i % 3 == c ? 1.5 : 0.0);
    labels.push_back(i % 3 + 1);
  }
  const Vector c = Vector::Constant(30, 0.7);
  SvmModel m = train_ovr(x, labels, c, 1e-9);

  for (int k = 1; k <= 3; ++k) {
    const Vector theta = m.thetas.row(k - 1).transpose();
    const double b = m.biases[k - 1];
    const double base = class_objective(x, labels, c, k, theta, b);
    for (int t = 0; t < 20; ++t) {
      Vector d_theta = 1e-3 * random_vector(rng, 3);
      const double d_b = 1e-3 * gauss(rng);
      const double perturbed =
          class_objective(x, labels, c, k, theta + d_theta, b + d_b);
      CHECK(perturbed >= base - 1e-8);
    }
  }
}

TEST_CASE("duplicating samples at half penalty leaves the optimizer unchanged") {
  std::mt19937_64 rng(73);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(16, 2);
  std::vector<int> labels;
  for (int i = 0; i < 16; ++i) {
    x(i, 0) = gauss(rng) + (i % 2 == 0 ? -1.0 : 1.0);
    x(i, 1) = gauss(rng);
    labels.push_back(i % 2 + 1);
  }
  SvmModel base = train_ovr(x, labels, Vector::Constant(16, 1.0), 1e-10);

  Matrix x2(32, 2);
  x2 << x, x;
  std::vector<int> labels2 = labels;
  labels2.insert(labels2.end(), labels.begin(), labels.end());
  SvmModel doubled = train_ovr(x2, labels2, Vector::Constant(32, 0.5), 1e-10);

  CHECK((base.thetas - doubled.thetas).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((base.biases - doubled.biases).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("degenerate and invalid inputs are rejected") {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_AS(train_ovr(x, {1, 1, 1}, Vector::Ones(3)),
                  DegenerateProblemError);
  CHECK_THROWS_AS(train_ovr(x, {1, 2, 1}, Vector::Zero(3)),
                  std::invalid_argument);
  Matrix bad = x;
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(train_ovr(bad, {1, 2, 1}, Vector::Ones(3)),
                  std::invalid_argument);
}

TEST_CASE("a class id absent from training data is always rejected") {
  Matrix x(4, 1);
  x << -2, -1, 1, 2;
  // class 2 never appears; ids are {1,3}
  SvmModel m = train_ovr(x, {1, 1, 3, 3}, Vector::Constant(4, 10.0));
  REQUIRE(m.n_classes() == 3);
  CHECK(m.thetas.row(1).norm() == 0.0);
  CHECK(m.biases[1] == -1.0);
  CHECK(accuracy(m, x, {1, 1, 3, 3}) == 1.0);
}
