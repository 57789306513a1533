#include <benchmark/benchmark.h>

#include "topoprobe/igt.hpp"
#include "topoprobe/toric.hpp"

using namespace topoprobe;

namespace {

void BM_IgtSweeps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const long sweep = 2L * n * n;
  for (auto _ : state) {
    auto d = sample_igt({1.0, n}, 16, 1, {sweep, sweep, false});
    benchmark::DoNotOptimize(d.configs.data());
  }
  state.SetItemsProcessed(state.iterations() * 17 * sweep);
}
BENCHMARK(BM_IgtSweeps)->Arg(4)->Arg(8)->Arg(16);

void BM_SigmaXStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  LatticeGeometry g(n);
  SigmaXChain chain(g, {FieldConfig::uniform(g, 1.0), 0.44}, 3);
  for (auto _ : state) chain.run(1000);
  benchmark::DoNotOptimize(chain.energy());
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SigmaXStep)->Arg(8)->Arg(20);

void BM_SigmaZStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  LatticeGeometry g(n);
  SigmaZLoopTable table(g, {FieldConfig::uniform(g, 1.0), 0.3});
  SigmaZChain chain(g, table, 4);
  for (auto _ : state) chain.run(100);
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SigmaZStep)->Arg(2)->Arg(3);

}  // namespace
