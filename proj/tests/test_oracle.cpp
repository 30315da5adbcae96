#include <doctest.h>

#include <random>

#include <json.hpp>

#include "adaptqp/errors.hpp"
#include "adaptqp/numerics.hpp"
#include "adaptqp/oracle.hpp"
#include "test_util.hpp"

using namespace adaptqp;
using testutil::Instance;
using testutil::random_instance;
using testutil::random_matrix;

TEST_CASE("materialized system: zero weight is the identity") {
  std::mt19937_64 rng(201);
  Matrix x = random_matrix(rng, 4, 3);
  PairWeights pw;
  pw.weights = Matrix::Ones(4, 2);
  pw.row_sums = pw.weights.rowwise().sum();
  Matrix v = oracle::materialize_full_v(x, pw, 0.0, 2);
  CHECK((v - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("materialized system: single block equals the block") {
  std::mt19937_64 rng(203);
  Matrix x = random_matrix(rng, 5, 4);
  PairWeights pw;
  pw.weights = random_matrix(rng, 5, 3).cwiseAbs();
  pw.row_sums = pw.weights.rowwise().sum();
  Matrix v = oracle::materialize_full_v(x, pw, 1.4, 1);
  Matrix b = compute_v_block(x, pw, 1.4);
  CHECK((v - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("materialized system equals blockdiag of the production block") {
  std::mt19937_64 rng(205);
  for (int t = 0; t < 6; ++t) {
    const Eigen::Index m_s = 1 + t % 4, m_t = 2 + t % 3, n_t = 3 + t;
    Matrix x = random_matrix(rng, n_t, m_t);
    PairWeights pw;
    pw.weights = random_matrix(rng, n_t, 4).cwiseAbs();
    pw.row_sums = pw.weights.rowwise().sum();
    Matrix v = oracle::materialize_full_v(x, pw, 0.9, m_s);
    Matrix b = compute_v_block(x, pw, 0.9);
    for (Eigen::Index r = 0; r < m_s; ++r) {
      CHECK((v.block(r * m_t, r * m_t, m_t, m_t) - b).cwiseAbs().maxCoeff() <=
            1e-12);
      for (Eigen::Index c = 0; c < m_s; ++c) {
        if (c == r) continue;
        CHECK(v.block(r * m_t, c * m_t, m_t, m_t).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
}

TEST_CASE("materialized system guard is a hard error") {
  Matrix x = Matrix::Zero(2, 21);
  PairWeights pw;
  pw.weights = Matrix::Ones(2, 1);
  pw.row_sums = pw.weights.rowwise().sum();
  CHECK_THROWS_AS(oracle::materialize_full_v(x, pw, 1.0, 20), CapacityError);
}

TEST_CASE("primal reference stays at zero when nothing is violated") {
  // one target sample whose hinge constraints already hold at W = 0
  Dataset source, target;
  source.features = Matrix::Zero(0, 2);
  target.features = Matrix::Zero(1, 2);
  target.features << 0.5, -0.25;
  target.labels = {1};
  SvmModel model;
  model.thetas = Matrix::Identity(2, 2);
  model.biases.resize(2);
  model.biases << 2.0, -2.0;  // y=+1: b >= 1; y=-1: -b >= 1
  PairWeights pw;
  pw.weights = Matrix::Zero(1, 0);
  pw.row_sums = Vector::Zero(1);
  HyperParams hp;
  hp.d_weight = 0.0;

  TransformMatrix w = oracle::primal_reference(source, target, model, pw, hp);
  CHECK(w.w.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("primal reference certifies the dual path") {
  std::mt19937_64 rng(207);
  Instance inst = random_instance(rng, 3, 2, 8, 4, 2, 0.6);
  WStepResult step = mmdtl2_w_step(inst.source, inst.target, inst.model,
                                   inst.pair_weights, inst.hp, false, 1e-10);
  TransformMatrix w_ref = oracle::primal_reference(
      inst.source, inst.target, inst.model, inst.pair_weights, inst.hp);
  CHECK((step.transform.w - w_ref.w).norm() <= 1e-4 * (1.0 + w_ref.w.norm()));

  const double obj_ref = w_step_objective(inst.source, inst.target, inst.model,
                                          inst.pair_weights, inst.hp, w_ref);
  const double obj_dual = w_step_objective(inst.source, inst.target,
                                           inst.model, inst.pair_weights,
                                           inst.hp, step.transform);
  CHECK(obj_ref <= obj_dual + 1e-6 * (1.0 + std::abs(obj_dual)));
}

TEST_CASE("audit: the all-zero stationary point is clean") {
  Dataset source, target;
  source.features = Matrix::Zero(0, 2);
  target.features = Matrix::Zero(2, 2);
  target.features << 1.0, 0.0, 0.0, 1.0;
  target.labels = {1, 2};
  SvmModel model;
  model.thetas = Matrix::Zero(2, 2);
  model.biases.resize(2);
  model.biases << 2.0, 2.0;
  PairWeights pw;
  pw.weights = Matrix::Zero(2, 0);
  pw.row_sums = Vector::Zero(2);
  HyperParams hp;
  hp.d_weight = 0.0;

  TransformMatrix w;
  w.w = Matrix::Zero(2, 2);
  // margins are y_ik b_k; every constraint with y=+1 holds, xi covers the rest
  oracle::AuditReport report = oracle::audit_solution(
      source, target, model, pw, hp, w, Vector::Zero(4));
  CHECK(report.details[0].value == 0.0);  // stationarity exactly zero
  CHECK(report.details[1].value == 0.0);  // box exactly feasible
}

TEST_CASE("audit passes on a converged solve and fails on a perturbed one") {
  std::mt19937_64 rng(211);
  Instance inst = random_instance(rng, 3, 3, 10, 5, 2, 1.0);
  WStepResult step = mmdtl2_w_step(inst.source, inst.target, inst.model,
                                   inst.pair_weights, inst.hp, false, 1e-10);
  oracle::AuditReport good = oracle::audit_solution(
      inst.source, inst.target, inst.model, inst.pair_weights, inst.hp,
      step.transform, step.qp.solution);
  CHECK(good.passed);

  TransformMatrix bumped = step.transform;
  bumped.w.array() += 1e-2;
  oracle::AuditReport bad = oracle::audit_solution(
      inst.source, inst.target, inst.model, inst.pair_weights, inst.hp,
      bumped, step.qp.solution);
  CHECK_FALSE(bad.passed);
  CHECK(bad.details[0].value > bad.details[0].tolerance);
}

TEST_CASE("audit verdict is monotone in the tolerances") {
  std::mt19937_64 rng(213);
  for (int t = 0; t < 6; ++t) {
    Instance inst = random_instance(rng, 2, 2, 8, 4, 2, t % 2 ? 1.0 : 0.0);
    WStepResult step = mmdtl2_w_step(inst.source, inst.target, inst.model,
                                     inst.pair_weights, inst.hp, false, 1e-8);
    TransformMatrix w = step.transform;
    if (t % 3 == 0) w.w.array() += 1e-5;  // sometimes slightly off

    oracle::AuditTolerances strict;
    oracle::AuditTolerances loose;
    loose.stationarity *= 10;
    loose.box *= 10;
    loose.complementarity *= 10;
    loose.duality_gap *= 10;
    oracle::AuditReport r_strict = oracle::audit_solution(
        inst.source, inst.target, inst.model, inst.pair_weights, inst.hp, w,
        step.qp.solution, strict);
    oracle::AuditReport r_loose = oracle::audit_solution(
        inst.source, inst.target, inst.model, inst.pair_weights, inst.hp, w,
        step.qp.solution, loose);
    if (r_strict.passed) CHECK(r_loose.passed);
  }
}

TEST_CASE("audit report serializes to parseable json") {
  std::mt19937_64 rng(217);
  Instance inst = random_instance(rng, 2, 2, 6, 3, 2, 0.5);
  WStepResult step = mmdtl2_w_step(inst.source, inst.target, inst.model,
                                   inst.pair_weights, inst.hp, false, 1e-9);
  oracle::AuditReport report = oracle::audit_solution(
      inst.source, inst.target, inst.model, inst.pair_weights, inst.hp,
      step.transform, step.qp.solution);
  nlohmann::json j = nlohmann::json::parse(report.to_json());
  CHECK(j.at("passed").get<bool>() == report.passed);
  CHECK(j.at("details").size() == report.details.size());
  CHECK(j.at("duality_gap").get<double>() == report.duality_gap);
}
