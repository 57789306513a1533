#include <benchmark/benchmark.h>

#include <vector>

#include "topoprobe/nn.hpp"
#include "topoprobe/rng.hpp"

using namespace topoprobe;

namespace {

std::vector<double> spins(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(count);
  for (auto& v : x) v = rng.coin() ? 1.0 : -1.0;
  return x;
}

void BM_Forward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto net = nn_init(architecture_preset("igt_desk", n), 1);
  const std::size_t batch = 128;
  const auto x = spins(batch * 2 * n * n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_scaled(x, batch));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_Forward)->Arg(4)->Arg(8);

void BM_TrainStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto net = nn_init(architecture_preset("igt_desk", n), 1);
  const std::size_t batch = 128;
  const auto x = spins(batch * 2 * n * n, 3);
  const std::vector<double> y(batch, 0.5);
  std::vector<double> grad(net.parameters().size());
  for (auto _ : state) benchmark::DoNotOptimize(net.loss_and_gradient(x, y, grad, true, 7));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TrainStep)->Arg(4)->Arg(8);

}  // namespace
