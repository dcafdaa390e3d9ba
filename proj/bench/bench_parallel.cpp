// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "vexsim/harness.hpp"
#include "vexsim/networks.hpp"

using namespace vexsim;

namespace {

void BM_SortsAllBinary(benchmark::State& state) {
  const CasNetwork net = gen_sort_network(static_cast<unsigned>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sorts_all_binary(net));
}

void BM_SortsAllBinarySerial(benchmark::State& state) {
  const CasNetwork net = gen_sort_network(static_cast<unsigned>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sorts_all_binary_serial(net));
}

SweepGrid bench_grid() {
  return parse_sweep_grid(R"({
    "base": {"bench": {"name": "memcpy", "bytes": 16384}, "mem_bytes": 4194304},
    "axes": {"bus.width_bits": [64, 128, 256], "bus.beats_per_cycle": [1, 2]},
    "benches": ["memcpy", "sort_simd", "psum_simd"]
  })");
}

void BM_Sweep(benchmark::State& state) {
  const SweepGrid grid = bench_grid();
  for (auto _ : state) benchmark::DoNotOptimize(sweep(grid));
}

void BM_SweepSerial(benchmark::State& state) {
  const SweepGrid grid = bench_grid();
  for (auto _ : state) benchmark::DoNotOptimize(sweep_serial(grid));
}

}  // namespace

BENCHMARK(BM_SortsAllBinary)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SortsAllBinarySerial)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
