#pragma once

// Benchmark runner: JSON configuration, per-benchmark data setup and host-side
// validation, CSV rows, and configuration sweeps.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vexsim/core.hpp"

namespace vexsim {

inline constexpr std::string_view kBenchNames[] = {
    "memcpy",      "stream_copy", "stream_scale", "stream_add", "stream_triad",
    "sort_simd",   "sort_scalar", "psum_simd",    "psum_scalar"};

bool is_bench_name(std::string_view name);

struct BenchSpec {
  std::string name = "memcpy";
  uint64_t bytes = 256 * 1024;  // per array
  uint64_t seed = 1;
};

struct RunConfig {
  SimConfig sim;
  BenchSpec bench;
  uint64_t max_cycles = 20'000'000'000ull;
};

/// Parses the JSON schema documented in the README. Missing keys keep their
/// defaults. Throws ConfigError on malformed input.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_json(const RunConfig& config);

/// Replaces bench.seed with $VEXSIM_SEED when it is set.
void apply_seed_override(RunConfig& config);

inline constexpr int kCsvVersion = 1;

struct MetricsRow {
  std::string bench;
  RunConfig config;
  uint64_t timed_cycles = 0;  // between the kernel's two cycle-counter reads
  uint64_t total_cycles = 0;
  uint64_t instructions = 0;
  uint64_t elements = 0;
  uint64_t bytes_moved = 0;
  double mbps = 0.0;          // bytes_moved * freq_mhz / timed_cycles
  MemStats mem;
  ExecStats exec;
  bool validated = false;
  std::string error;
};

/// Runs one benchmark and validates its output against a host oracle.
/// Configuration and validation problems are reported in the row.
MetricsRow run_bench(const RunConfig& config);

std::string csv_header();
std::string csv_row(const MetricsRow& row);
std::string to_csv(const std::vector<MetricsRow>& rows);

/// One configuration of a sweep grid; `error` is set when it failed to parse.
struct GridPoint {
  RunConfig config;
  std::string error;
};

struct SweepGrid {
  std::vector<GridPoint> points;
  std::vector<std::string> benches;
};

/// {"base": {...}, "points": [{...}, ...]} or {"base": {...}, "axes":
/// {"llc.block_bits": [...], ...}}, plus "benches": [...]. Points are merged
/// over the base config; axes expand to their cartesian product.
SweepGrid parse_sweep_grid(std::string_view json_text);

/// One row per (point, bench) in grid order. Points run in parallel.
std::vector<MetricsRow> sweep(const SweepGrid& grid);
/// Same rows, computed one after another.
std::vector<MetricsRow> sweep_serial(const SweepGrid& grid);

}  // namespace vexsim
