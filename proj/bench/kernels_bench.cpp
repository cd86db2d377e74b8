// Parallel kernels against the serial reference they are tested against.
#include <benchmark/benchmark.h>

#include <vector>

#include "fnirs/kernels.hpp"
#include "fnirs/layers.hpp"
#include "fnirs/rng.hpp"

namespace {

using namespace fnirs;

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// (m, n, k) as used by an LSTM gate matmul: batch 64, 4*64 gates, 64+24 inputs.
void BM_gemm_nt(benchmark::State& state) {
  const std::size_t m = state.range(0), n = state.range(1), k = state.range(2);
  const auto a = random_vec(m * k, 1), b = random_vec(n * k, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    kernels::gemm_nt(m, n, k, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * m * n * k);
}

void BM_gemm_nt_reference(benchmark::State& state) {
  const std::size_t m = state.range(0), n = state.range(1), k = state.range(2);
  const auto a = random_vec(m * k, 1), b = random_vec(n * k, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    kernels::reference::gemm_nt(m, n, k, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * m * n * k);
}

void BM_gemm_tn(benchmark::State& state) {
  const std::size_t m = state.range(0), n = state.range(1), k = state.range(2);
  const auto a = random_vec(k * m, 1), b = random_vec(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    kernels::gemm_tn(m, n, k, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * m * n * k);
}

void BM_gemm_tn_reference(benchmark::State& state) {
  const std::size_t m = state.range(0), n = state.range(1), k = state.range(2);
  const auto a = random_vec(k * m, 1), b = random_vec(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    kernels::reference::gemm_tn(m, n, k, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * m * n * k);
}

void gemm_args(benchmark::internal::Benchmark* b) {
  b->Args({64, 256, 88})->Args({256, 88, 64})->Args({64, 64, 7200})->Args({256, 256, 256});
}

BENCHMARK(BM_gemm_nt)->Apply(gemm_args);
BENCHMARK(BM_gemm_nt_reference)->Apply(gemm_args);
BENCHMARK(BM_gemm_tn)->Apply(gemm_args);
BENCHMARK(BM_gemm_tn_reference)->Apply(gemm_args);

// One 300-step LSTM layer forward, batch 16, 24 -> 64.
void BM_lstm_layer_forward(benchmark::State& state) {
  LstmParams p = make_lstm(64, 24, Activation::relu);
  Array x({16, 300, 24});
  Rng rng(3);
  for (auto& v : x.values()) v = rng.uniform(-1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(lstm_layer_forward(x, p, true));
}
BENCHMARK(BM_lstm_layer_forward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
