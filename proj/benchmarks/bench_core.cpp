#include <benchmark/benchmark.h>

#include "finer/geometry.hpp"
#include "finer/linalg.hpp"
#include "finer/mlp.hpp"
#include "finer/rng.hpp"
#include "finer/sdf.hpp"

namespace {

finer::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  finer::CounterRng rng(seed);
  finer::Matrix m(r, c);
  for (double& v : m.span()) v = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(finer::matmul(a, b));
  state.counters["GFLOPS"] = benchmark::Counter(2.0 * static_cast<double>(n * n * n),
                                                benchmark::Counter::kIsIterationInvariantRate,
                                                benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(512);

void BM_TrainStep(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto batch = static_cast<std::size_t>(state.range(1));
  const finer::Mlp mlp = finer::init_mlp({2, width, width, width, 3}, finer::Activation::finer(30.0), {0.7, 0});
  const auto coords = random_matrix(batch, 2, 3);
  const finer::Matrix grad(batch, 3, 1.0 / static_cast<double>(batch));
  for (auto _ : state) {
    const auto pass = finer::forward(mlp, coords);
    benchmark::DoNotOptimize(finer::backward(mlp, pass.cache, grad));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_TrainStep)->Args({64, 16384})->Args({256, 1024})->Unit(benchmark::kMillisecond);

void BM_JacobiEigen(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_matrix(n, n, 4);
  const auto k = finer::matmul_nt(g, g);
  for (auto _ : state) benchmark::DoNotOptimize(finer::sym_eigen(k));
}
BENCHMARK(BM_JacobiEigen)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MarchingCubes(benchmark::State& state) {
  const auto res = static_cast<std::size_t>(state.range(0));
  const auto grid = finer::sdf_grid(finer::SphereSdf(), res);
  for (auto _ : state) benchmark::DoNotOptimize(finer::marching_cubes(grid));
}
BENCHMARK(BM_MarchingCubes)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
