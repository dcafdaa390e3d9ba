#include <doctest.h>

#include <cstdlib>
#include <set>

#include "vexsim/harness.hpp"

using namespace vexsim;

namespace {

RunConfig small(const std::string& bench, uint64_t bytes = 4096) {
  RunConfig rc;
  rc.bench.name = bench;
  rc.bench.bytes = bytes;
  rc.sim.mem_bytes = 4u << 20;
  return rc;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing") {
  const RunConfig rc = parse_run_config(R"({
    "vlen_bits": 512,
    "dl1": {"block_bits": 512, "ways": 4},
    "il1": {"block_bits": 512},
    "llc": {"block_bits": 4096, "subblocks": 8},
    "bus": {"width_bits": 64, "beats_per_cycle": 2, "setup_cycles": 12},
    "freq_mhz": 200,
    "replacement": "random",
    "bench": {"name": "psum_simd", "bytes": 8192, "seed": 9}
  })");
  CHECK(rc.sim.vlen_bits == 512);
  CHECK(rc.sim.cache.dl1_ways == 4);
  CHECK(rc.sim.cache.llc_block_bits == 4096);
  CHECK(rc.sim.cache.bus_width_bits == 64);
  CHECK(rc.sim.cache.mem_setup_latency_cycles == 12);
  CHECK(rc.sim.cache.modeled_frequency_mhz == 200);
  CHECK(rc.sim.replacement == Replacement::Random);
  CHECK(rc.bench.name == "psum_simd");
  CHECK(rc.bench.seed == 9);
  CHECK(rc.sim.seed == 9);

  CHECK_THROWS_AS(parse_run_config(R"({"vlen": 256})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"llc": {"size": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"replacement": "lru"})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"vlen_bits": "wide"})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("{"), ConfigError);
}

TEST_CASE("config json round trip") {
  RunConfig rc = small("stream_triad", 8192);
  rc.sim.cache.llc_ways = 4;
  rc.sim.div_cycles = 7;
  rc.max_cycles = 12345;
  const RunConfig back = parse_run_config(run_config_json(rc));
  CHECK(run_config_json(back) == run_config_json(rc));
  CHECK(back.sim.cache.llc_ways == 4);
  CHECK(back.sim.div_cycles == 7);
  CHECK(back.max_cycles == 12345);
}

TEST_CASE("every benchmark validates on a small input") {
  for (std::string_view name : kBenchNames) {
    CAPTURE(name);
    const MetricsRow row = run_bench(small(std::string(name)));
    CHECK(row.error == "");
    CHECK(row.validated);
    CHECK(row.timed_cycles > 0);
    CHECK(row.timed_cycles < row.total_cycles);
    CHECK(row.mbps > 0);
    CHECK(row.exec.scoreboard_violations == 0);
    CHECK(row.exec.cycles == row.exec.consumed + row.exec.stalls());
  }
}

TEST_CASE("vector widths other than the default") {
  for (unsigned vlen : {128u, 512u}) {
    for (const char* bench : {"memcpy", "sort_simd", "psum_simd"}) {
      CAPTURE(vlen);
      CAPTURE(bench);
      RunConfig rc = small(bench);
      rc.sim.vlen_bits = vlen;
      rc.sim.cache.il1_block_bits = rc.sim.cache.dl1_block_bits = vlen;
      const MetricsRow row = run_bench(rc);
      CHECK(row.error == "");
      CHECK(row.validated);
    }
  }
}

TEST_CASE("bad inputs are reported in the row") {
  MetricsRow row = run_bench(small("memcpy", 100));
  CHECK_FALSE(row.validated);
  CHECK(row.error.rfind("ConfigInvalid", 0) == 0);

  row = run_bench(small("sort_simd", 3 * 1024));
  CHECK(row.error.rfind("ConfigInvalid", 0) == 0);

  row = run_bench(small("nope"));
  CHECK(row.error.rfind("ConfigInvalid", 0) == 0);

  RunConfig rc = small("memcpy", 2u << 20);
  row = run_bench(rc);
  CHECK(row.error.rfind("ConfigInvalid", 0) == 0);

  rc = small("memcpy");
  rc.max_cycles = 100;
  row = run_bench(rc);
  CHECK_FALSE(row.validated);
  CHECK(row.error.find("max_cycles_exceeded") != std::string::npos);
}

TEST_CASE("vector copy beats the scalar copy") {
  const MetricsRow v = run_bench(small("memcpy", 64 * 1024));
  const MetricsRow s = run_bench(small("stream_copy", 64 * 1024));
  REQUIRE(v.validated);
  REQUIRE(s.validated);
  CHECK(v.mbps > s.mbps);
}

TEST_CASE("csv rows") {
  const MetricsRow row = run_bench(small("memcpy"));
  const std::string header = csv_header();
  const std::string line = csv_row(row);
  auto fields = [](const std::string& s) {
    std::size_t n = 1;
    for (char c : s) n += c == ',';
    return n;
  };
  CHECK(fields(header) == fields(line));
  CHECK(line.rfind("1,memcpy,256,", 0) == 0);
  CHECK(line.find(",true,") != std::string::npos);

  MetricsRow bad = run_bench(small("memcpy", 100));
  const std::string b = csv_row(bad);
  CHECK(b.find(",false,") != std::string::npos);
}

TEST_CASE("sweep grids") {
  const char* grid_text = R"({
    "base": {"bench": {"name": "memcpy", "bytes": 4096}, "mem_bytes": 4194304},
    "points": [
      {"llc": {"block_bits": 1024, "sets": 128, "subblocks": 2}},
      {"dl1": {"block_bits": 512}},
      {"llc": {"block_bits": 4096, "sets": 32, "subblocks": 8}}
    ],
    "benches": ["memcpy", "psum_simd"]
  })";
  const SweepGrid grid = parse_sweep_grid(grid_text);
  REQUIRE(grid.points.size() == 3);

  const auto rows = sweep(grid);
  REQUIRE(rows.size() == 6);
  for (std::size_t i : {0u, 1u, 4u, 5u}) {
    CAPTURE(i);
    CHECK(rows[i].validated);
  }
  for (std::size_t i : {2u, 3u}) {
    CHECK_FALSE(rows[i].validated);
    CHECK(rows[i].error.rfind("ConfigInvalid", 0) == 0);
  }
  CHECK(rows[0].bench == "memcpy");
  CHECK(rows[1].bench == "psum_simd");

  const std::string csv = to_csv(rows);
  CHECK(csv == to_csv(sweep_serial(grid)));
  CHECK(csv == to_csv(sweep(parse_sweep_grid(grid_text))));
  CHECK(count_lines(csv) == 7);
}

TEST_CASE("axes expand to a cartesian product") {
  const SweepGrid grid = parse_sweep_grid(R"({
    "base": {"bench": {"name": "memcpy", "bytes": 4096}},
    "axes": {"bus.width_bits": [64, 128], "bus.beats_per_cycle": [1, 2]}
  })");
  REQUIRE(grid.points.size() == 4);
  std::set<std::pair<unsigned, unsigned>> seen;
  for (const auto& p : grid.points) {
    CHECK(p.error.empty());
    seen.insert({p.config.sim.cache.bus_width_bits, p.config.sim.cache.beats_per_cycle});
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("single point grid") {
  const SweepGrid grid = parse_sweep_grid(R"({"base": {"bench": {"name": "stream_add", "bytes": 4096}}})");
  const auto rows = sweep(grid);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].bench == "stream_add");
  CHECK(rows[0].validated);
  CHECK(count_lines(to_csv(rows)) == 2);
}

TEST_CASE("malformed grids") {
  CHECK_THROWS_AS(parse_sweep_grid(R"({"base": {}, "extra": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_grid(R"({"axes": {"vlen_bits": []}})"), ConfigError);
  const SweepGrid g = parse_sweep_grid(R"({"points": [{"bogus": 1}, {}]})");
  REQUIRE(g.points.size() == 2);
  CHECK_FALSE(g.points[0].error.empty());
  CHECK(g.points[1].error.empty());
}

TEST_CASE("seed override from the environment") {
  RunConfig rc = small("sort_simd");
  ::setenv("VEXSIM_SEED", "77", 1);
  apply_seed_override(rc);
  CHECK(rc.bench.seed == 77);
  CHECK(rc.sim.seed == 77);
  ::setenv("VEXSIM_SEED", "x1", 1);
  CHECK_THROWS_AS(apply_seed_override(rc), ConfigError);
  ::unsetenv("VEXSIM_SEED");
  rc.bench.seed = 5;
  apply_seed_override(rc);
  CHECK(rc.bench.seed == 5);

  RunConfig a = small("sort_simd"), b = small("sort_simd");
  b.bench.seed = 2;
  const MetricsRow ra = run_bench(a), rb = run_bench(b);
  CHECK(ra.validated);
  CHECK(rb.validated);
  CHECK(run_bench(a).timed_cycles == ra.timed_cycles);
}

}  // TEST_SUITE
