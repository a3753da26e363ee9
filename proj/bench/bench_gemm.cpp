#include <benchmark/benchmark.h>

#include <vector>

#include "dmwat/core/kernels.hpp"
#include "dmwat/core/rng.hpp"

namespace k = dmwat::kernels;

namespace {

struct Operands {
  std::vector<double> a, b, c;
  explicit Operands(std::size_t n) : a(n * n), b(n * n), c(n * n) {
    dmwat::Rng rng(1);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
  }
};

template <auto Kernel>
void run(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Operands op(n);
  for (auto _ : state) {
    Kernel(n, n, n, op.a, op.b, op.c, false);
    benchmark::DoNotOptimize(op.c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

}  // namespace

BENCHMARK(run<k::serial::gemm_nn>)->Name("gemm_nn/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(run<k::omp::gemm_nn>)->Name("gemm_nn/openmp")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(run<k::serial::gemm_nt>)->Name("gemm_nt/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(run<k::omp::gemm_nt>)->Name("gemm_nt/openmp")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(run<k::serial::gemm_tn>)->Name("gemm_tn/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(run<k::omp::gemm_tn>)->Name("gemm_tn/openmp")->RangeMultiplier(2)->Range(32, 256);

BENCHMARK_MAIN();
