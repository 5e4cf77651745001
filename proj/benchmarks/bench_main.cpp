#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "cglab/ensemble.hpp"
#include "cglab/kawasaki.hpp"
#include "cglab/potential.hpp"
#include "cglab/renorm.hpp"
#include "cglab/transport.hpp"

namespace {

std::vector<double> normal_points(std::size_t n, double mean, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

void BM_Renormalize(benchmark::State& state) {
  const auto psi = cglab::make_double_well().with_halfwidth(8.0);
  const auto grid = cglab::UniformGrid(-2.0, 2.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cglab::renormalize(psi, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Renormalize)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_Matching(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = normal_points(2 * n, 0.0, 1), b = normal_points(2 * n, 1.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cglab::wasserstein_matching(a, b, 2, 2.0));
}
BENCHMARK(BM_Matching)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Sinkhorn(benchmark::State& state) {
  const std::size_t n = 128;
  const auto a = normal_points(2 * n, 0.0, 1), b = normal_points(2 * n, 1.0, 2);
  const double eps = 1e-2 * cglab::median_cost(a, b, 2, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(cglab::wasserstein_sinkhorn(a, b, 2, 2.0, eps));
}
BENCHMARK(BM_Sinkhorn)->Unit(benchmark::kMillisecond);

void BM_Quantile(benchmark::State& state) {
  const auto a = normal_points(static_cast<std::size_t>(state.range(0)), 0.0, 1);
  const auto b = normal_points(static_cast<std::size_t>(state.range(0)), 1.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cglab::wasserstein_1d(a, b, 2.0));
}
BENCHMARK(BM_Quantile)->Arg(1 << 12)->Arg(1 << 16);

void BM_Sampler(benchmark::State& state) {
  const cglab::CanonicalEnsemble ens{static_cast<int>(state.range(0)), 0.0, cglab::make_double_well()};
  for (auto _ : state) benchmark::DoNotOptimize(cglab::sample_canonical(ens, {1000, 1.0, 100, 1, 7}));
  state.SetItemsProcessed(state.iterations() * 1100 * state.range(0));
}
BENCHMARK(BM_Sampler)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_KawasakiSteps(benchmark::State& state) {
  const cglab::CanonicalEnsemble ens{static_cast<int>(state.range(0)), 0.0, cglab::make_double_well()};
  cglab::KawasakiConfig cfg;
  cfg.N = ens.N;
  cfg.h = 0.002;
  cfg.T = 0.2;
  cfg.n_paths = 64;
  cfg.n_checkpoints = 2;
  for (auto _ : state) benchmark::DoNotOptimize(cglab::simulate(ens, cfg));
  state.SetItemsProcessed(state.iterations() * 100 * 64);
}
BENCHMARK(BM_KawasakiSteps)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
