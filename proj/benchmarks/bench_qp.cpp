#include <benchmark/benchmark.h>

#include <random>

#include "adaptqp/qp.hpp"

using namespace adaptqp;

namespace {

BoxQp random_box_qp(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = gauss(rng);
  BoxQp p;
  p.q = a * a.transpose() / n + 0.1 * Matrix::Identity(n, n);
  p.g.resize(n);
  for (int i = 0; i < n; ++i) p.g[i] = gauss(rng);
  p.lower = Vector::Zero(n);
  p.upper = Vector::Ones(n);
  return p;
}

void BM_BoxQpSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  BoxQp p = random_box_qp(n, 17);
  for (auto _ : state) {
    BoxQpResult r = solve_box_qp(p, 1e-8);
    benchmark::DoNotOptimize(r.objective);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_BoxQpSolve)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_InequalityQpSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  BoxQp box = random_box_qp(n, 23);
  InequalityQp p;
  p.h = box.q;
  p.f = box.g;
  p.a = Matrix::Identity(n, n);
  p.b = Vector::Zero(n);
  for (auto _ : state) {
    InequalityQpResult r = solve_inequality_qp(p, 1e-8);
    benchmark::DoNotOptimize(r.objective);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_InequalityQpSolve)->RangeMultiplier(2)->Range(32, 256)->Complexity();

}  // namespace
