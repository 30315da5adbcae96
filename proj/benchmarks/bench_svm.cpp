#include <benchmark/benchmark.h>

#include "adaptqp/dataio.hpp"
#include "adaptqp/svm.hpp"

using namespace adaptqp;

namespace {

void BM_TrainOvr(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  auto [source, target] =
      io::gen_shifted(io::ShiftSpec::defaults(dim, 2, 3), 100, 45);
  const Vector c = Vector::Constant(source.n_samples(), 1.0);
  for (auto _ : state) {
    SvmModel m = train_ovr(source.features, source.labels, c);
    benchmark::DoNotOptimize(m.biases[0]);
  }
  state.SetItemsProcessed(state.iterations() * source.n_samples());
}
BENCHMARK(BM_TrainOvr)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

void BM_PredictBatch(benchmark::State& state) {
  auto [source, target] =
      io::gen_shifted(io::ShiftSpec::defaults(64, 2, 5), 200, 90);
  SvmModel m = train_ovr(source.features, source.labels,
                         Vector::Constant(source.n_samples(), 1.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(accuracy(m, target.features, target.labels));
  }
  state.SetItemsProcessed(state.iterations() * target.n_samples());
}
BENCHMARK(BM_PredictBatch);

}  // namespace
