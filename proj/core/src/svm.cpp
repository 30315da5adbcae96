#include "adaptqp/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "adaptqp/errors.hpp"

namespace adaptqp {

namespace {

constexpr double kTau = 1e-12;

// L1-hinge SVM dual for one binary problem:
//   min_a 0.5 a'Qa - e'a   s.t.  0 <= a_i <= c_i,  y'a = 0
// with Q_ij = y_i y_j x_i.x_j. Solved by SMO on the maximal violating pair;
// theta = X'(a o y), b = (m + M) / 2 from the final violating-pair bounds.
struct BinarySvm {
  Vector theta;
  double bias = 0.0;
};

BinarySvm solve_binary(const Matrix& x, const Vector& y, const Vector& c,
                       double tol, int max_sweeps) {
  const Eigen::Index n = x.rows();
  const bool cache_gram = n <= 2048;
  Matrix gram;
  if (cache_gram) gram.noalias() = x * x.transpose();

  Vector qdiag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    qdiag[i] = cache_gram ? gram(i, i) : x.row(i).squaredNorm();
  }
  // column i of Q, with the y factors folded in
  auto q_col = [&](Eigen::Index i) -> Vector {
    Vector k = cache_gram ? Vector(gram.col(i))
                          : Vector(x * x.row(i).transpose());
    return y[i] * k.cwiseProduct(y);
  };

  Vector a = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);

  const long long max_updates =
      static_cast<long long>(max_sweeps) * ((n + 1) / 2);
  double m_up = 0.0, m_low = 0.0;
  for (long long t = 0;; ++t) {
    // maximal violating pair over -y_i grad_i
    Eigen::Index i = -1, j = -1;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (Eigen::Index t2 = 0; t2 < n; ++t2) {
      const double v = -y[t2] * grad[t2];
      const bool in_up = (y[t2] > 0 && a[t2] < c[t2]) || (y[t2] < 0 && a[t2] > 0);
      const bool in_low = (y[t2] > 0 && a[t2] > 0) || (y[t2] < 0 && a[t2] < c[t2]);
      if (in_up && v > m_up) {
        m_up = v;
        i = t2;
      }
      if (in_low && v < m_low) {
        m_low = v;
        j = t2;
      }
    }
    if (i < 0 || j < 0 || m_up - m_low <= tol || t >= max_updates) break;

    Vector qi = q_col(i);
    Vector qj = q_col(j);
    const double old_ai = a[i], old_aj = a[j];
    const double ci = c[i], cj = c[j];

    if (y[i] != y[j]) {
      double quad = qdiag[i] + qdiag[j] + 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) { a[j] = 0; a[i] = diff; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
      }
      if (diff > ci - cj) {
        if (a[i] > ci) { a[i] = ci; a[j] = ci - diff; }
      } else {
        if (a[j] > cj) { a[j] = cj; a[i] = cj + diff; }
      }
    } else {
      double quad = qdiag[i] + qdiag[j] - 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > ci) {
        if (a[i] > ci) { a[i] = ci; a[j] = sum - ci; }
      } else {
        if (a[j] < 0) { a[j] = 0; a[i] = sum; }
      }
      if (sum > cj) {
        if (a[j] > cj) { a[j] = cj; a[i] = sum - cj; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = sum; }
      }
    }

    grad.noalias() += (a[i] - old_ai) * qi;
    grad.noalias() += (a[j] - old_aj) * qj;
  }

  BinarySvm out;
  out.theta = x.transpose() * a.cwiseProduct(y);
  if (std::isfinite(m_up) && std::isfinite(m_low)) {
    out.bias = 0.5 * (m_up + m_low);
  } else if (std::isfinite(m_up)) {
    out.bias = m_up;
  } else if (std::isfinite(m_low)) {
    out.bias = m_low;
  }
  return out;
}

}  // namespace

SvmModel train_ovr(const Matrix& features, const std::vector<int>& labels,
                   const Vector& per_sample_c, double tol, int max_sweeps) {
  const Eigen::Index n = features.rows();
  if (n != static_cast<Eigen::Index>(labels.size()) ||
      n != per_sample_c.size()) {
    throw std::invalid_argument("train_ovr: size mismatch");
  }
  if (!features.allFinite()) {
    throw std::invalid_argument("train_ovr: non-finite feature values");
  }
  if ((per_sample_c.array() <= 0.0).any()) {
    throw std::invalid_argument("train_ovr: penalties must be > 0");
  }
  std::set<int> distinct(labels.begin(), labels.end());
  if (n < 2 || distinct.size() < 2) {
    throw DegenerateProblemError(
        "train_ovr: need at least two samples from two distinct classes");
  }

  int k_max = 0;
  for (int label : labels) k_max = std::max(k_max, label);

  SvmModel model;
  model.thetas = Matrix::Zero(k_max, features.cols());
  model.biases = Vector::Zero(k_max);
  for (int k = 1; k <= k_max; ++k) {
    if (!distinct.count(k)) {
      model.biases[k - 1] = -1.0;
      continue;
    }
    Vector y = binarize_labels(labels, k);
    BinarySvm bin = solve_binary(features, y, per_sample_c, tol, max_sweeps);
    model.thetas.row(k - 1) = bin.theta.transpose();
    model.biases[k - 1] = bin.bias;
  }
  return model;
}

Vector decision_values(const SvmModel& m, const Vector& x) {
  if (x.size() != m.dim()) {
    throw std::invalid_argument("decision_values: feature dimension mismatch");
  }
  return m.thetas * x + m.biases;
}

int predict(const SvmModel& m, const Vector& x) {
  Vector values = decision_values(m, x);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return static_cast<int>(best) + 1;
}

std::vector<int> predict(const SvmModel& m, const Matrix& features) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out.push_back(predict(m, Vector(features.row(i).transpose())));
  }
  return out;
}

double accuracy(const SvmModel& m, const Matrix& features,
                const std::vector<int>& labels) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size()) ||
      features.rows() == 0) {
    throw std::invalid_argument("accuracy: size mismatch or empty input");
  }
  std::vector<int> pred = predict(m, features);
  Eigen::Index correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (pred[i] == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.rows());
}

}  // namespace adaptqp
