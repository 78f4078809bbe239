// Separable (OpenMP) kernels against the serial non-separable references.
#include <benchmark/benchmark.h>

#include <random>

#include "ouspec/estimates.hpp"
#include "ouspec/kernels.hpp"
#include "ouspec/propagator.hpp"

using namespace ou;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (auto& v : t.data) v = cplx(g(rng), g(rng));
  return t;
}

std::vector<RealMatrix> random_mats(int d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<RealMatrix> mats(d, RealMatrix(n, n));
  for (auto& m : mats)
    for (auto& v : m.data) v = g(rng);
  return mats;
}

void BM_apply_separable(benchmark::State& st) {
  const int d = static_cast<int>(st.range(0));
  const auto n = static_cast<std::size_t>(st.range(1));
  const Tensor in = random_tensor(std::vector<std::size_t>(d, n), 1);
  const auto mats = random_mats(d, n, 2);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::apply_separable(mats, in));
}

void BM_apply_reference(benchmark::State& st) {
  const int d = static_cast<int>(st.range(0));
  const auto n = static_cast<std::size_t>(st.range(1));
  const Tensor in = random_tensor(std::vector<std::size_t>(d, n), 1);
  const auto mats = random_mats(d, n, 2);
  for (auto _ : st) benchmark::DoNotOptimize(reference::apply_separable(mats, in));
}

GridField bench_grid(int d, int N, int M) {
  EnsembleSpec e{1, 3, Profile::random_coefficient, BasisSpec{d, N, M}, 0};
  return inverse_transform(generate_ensemble(e)[0]);
}

void BM_kernel_propagate(benchmark::State& st) {
  const GridField g = bench_grid(static_cast<int>(st.range(0)), 8, 10);
  KernelEvalConfig cfg;
  cfg.oversample = 2;
  for (auto _ : st) benchmark::DoNotOptimize(kernel_propagate(g, 0.7, cfg));
}

void BM_kernel_propagate_reference(benchmark::State& st) {
  const GridField g = bench_grid(static_cast<int>(st.range(0)), 8, 10);
  KernelEvalConfig cfg;
  cfg.oversample = 2;
  for (auto _ : st) benchmark::DoNotOptimize(reference::kernel_propagate(g, 0.7, cfg));
}

void BM_spectral_transform_roundtrip(benchmark::State& st) {
  const GridField g = bench_grid(static_cast<int>(st.range(0)), 24, 32);
  for (auto _ : st) benchmark::DoNotOptimize(inverse_transform(forward_transform(g)));
}

}  // namespace

BENCHMARK(BM_apply_separable)->Args({2, 32})->Args({3, 16});
BENCHMARK(BM_apply_reference)->Args({2, 32})->Args({3, 16});
BENCHMARK(BM_kernel_propagate)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kernel_propagate_reference)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spectral_transform_roundtrip)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
