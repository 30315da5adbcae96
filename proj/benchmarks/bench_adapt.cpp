#include <benchmark/benchmark.h>

#include "adaptqp/adapt.hpp"
#include "adaptqp/dataio.hpp"
#include "adaptqp/oracle.hpp"
#include "adaptqp/svm.hpp"

using namespace adaptqp;

namespace {

struct Fixture {
  Dataset source, target;
  SvmModel model;
  PairWeights pw;
  HyperParams hp;
};

Fixture make_fixture(int dim) {
  Fixture f;
  std::tie(f.source, f.target) =
      io::gen_shifted(io::ShiftSpec::defaults(dim, 2, 11), 100, 45);
  f.model = train_ovr(f.source.features, f.source.labels,
                      Vector::Constant(f.source.n_samples(), 1.0));
  f.pw = compute_pair_weights(f.source.labels, f.target.labels,
                              PairWeightMode::ClassNormalized);
  return f;
}

void BM_DualSetup(benchmark::State& state) {
  Fixture f = make_fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto [ds, qp] = mmdtl2_build_dual(f.source, f.target, f.model, f.pw, f.hp);
    benchmark::DoNotOptimize(qp.g.sum());
  }
}
BENCHMARK(BM_DualSetup)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

void BM_DualWStep(benchmark::State& state) {
  Fixture f = make_fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    WStepResult step = mmdtl2_w_step(f.source, f.target, f.model, f.pw, f.hp);
    benchmark::DoNotOptimize(step.transform.w.norm());
  }
}
BENCHMARK(BM_DualWStep)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

// the explicit-QP route; only sensible at small dimensions
void BM_PrimalWStep(benchmark::State& state) {
  Fixture f = make_fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    TransformMatrix w =
        oracle::primal_reference(f.source, f.target, f.model, f.pw, f.hp,
                                 false, 1e-8);
    benchmark::DoNotOptimize(w.w.norm());
  }
}
BENCHMARK(BM_PrimalWStep)->Arg(8)->Arg(16)->Arg(24);

}  // namespace
