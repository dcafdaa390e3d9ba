#include "vexsim/harness.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "vexsim/assembler.hpp"
#include "vexsim/kernels.hpp"

namespace vexsim {

namespace {

using json = nlohmann::ordered_json;

constexpr uint32_t kDataBase = 0x100000;
constexpr uint32_t kArrayAlign = 4096;

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const char* where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
}

RunConfig from_json(const json& j) {
  RunConfig rc;
  SimConfig& sim = rc.sim;
  CacheConfig& c = sim.cache;
  check_keys(j, {"vlen_bits", "il1", "dl1", "llc", "bus", "freq_mhz", "bench", "timing", "mem_bytes",
                 "max_cycles", "replacement"},
             "config");
  read_key(j, "vlen_bits", sim.vlen_bits);
  if (j.contains("il1")) {
    const auto& o = j["il1"];
    check_keys(o, {"sets", "block_bits"}, "il1");
    read_key(o, "sets", c.il1_sets);
    read_key(o, "block_bits", c.il1_block_bits);
  }
  if (j.contains("dl1")) {
    const auto& o = j["dl1"];
    check_keys(o, {"sets", "ways", "block_bits"}, "dl1");
    read_key(o, "sets", c.dl1_sets);
    read_key(o, "ways", c.dl1_ways);
    read_key(o, "block_bits", c.dl1_block_bits);
  }
  if (j.contains("llc")) {
    const auto& o = j["llc"];
    check_keys(o, {"sets", "ways", "block_bits", "subblocks"}, "llc");
    read_key(o, "sets", c.llc_sets);
    read_key(o, "ways", c.llc_ways);
    read_key(o, "block_bits", c.llc_block_bits);
    read_key(o, "subblocks", c.llc_subblocks);
  }
  if (j.contains("bus")) {
    const auto& o = j["bus"];
    check_keys(o, {"width_bits", "beats_per_cycle", "setup_cycles"}, "bus");
    read_key(o, "width_bits", c.bus_width_bits);
    read_key(o, "beats_per_cycle", c.beats_per_cycle);
    read_key(o, "setup_cycles", c.mem_setup_latency_cycles);
  }
  read_key(j, "freq_mhz", c.modeled_frequency_mhz);
  if (j.contains("timing")) {
    const auto& o = j["timing"];
    check_keys(o, {"dl1_hit_latency", "l1_miss_overhead", "llc_array_cycles", "div_cycles"}, "timing");
    read_key(o, "dl1_hit_latency", c.dl1_hit_latency);
    read_key(o, "l1_miss_overhead", c.l1_miss_overhead);
    read_key(o, "llc_array_cycles", c.llc_array_cycles);
    read_key(o, "div_cycles", sim.div_cycles);
  }
  read_key(j, "mem_bytes", sim.mem_bytes);
  read_key(j, "max_cycles", rc.max_cycles);
  if (j.contains("replacement")) {
    const auto r = j["replacement"].get<std::string>();
    if (r == "nru") sim.replacement = Replacement::Nru;
    else if (r == "random") sim.replacement = Replacement::Random;
    else throw ConfigError("replacement must be \"nru\" or \"random\"");
  }
  if (j.contains("bench")) {
    const auto& o = j["bench"];
    check_keys(o, {"name", "bytes", "seed"}, "bench");
    read_key(o, "name", rc.bench.name);
    read_key(o, "bytes", rc.bench.bytes);
    read_key(o, "seed", rc.bench.seed);
  }
  sim.seed = rc.bench.seed;
  return rc;
}

json to_json(const RunConfig& rc) {
  const CacheConfig& c = rc.sim.cache;
  json j;
  j["vlen_bits"] = rc.sim.vlen_bits;
  j["il1"] = {{"sets", c.il1_sets}, {"block_bits", c.il1_block_bits}};
  j["dl1"] = {{"sets", c.dl1_sets}, {"ways", c.dl1_ways}, {"block_bits", c.dl1_block_bits}};
  j["llc"] = {{"sets", c.llc_sets},
              {"ways", c.llc_ways},
              {"block_bits", c.llc_block_bits},
              {"subblocks", c.llc_subblocks}};
  j["bus"] = {{"width_bits", c.bus_width_bits},
              {"beats_per_cycle", c.beats_per_cycle},
              {"setup_cycles", c.mem_setup_latency_cycles}};
  j["freq_mhz"] = c.modeled_frequency_mhz;
  j["bench"] = {{"name", rc.bench.name}, {"bytes", rc.bench.bytes}, {"seed", rc.bench.seed}};
  j["timing"] = {{"dl1_hit_latency", c.dl1_hit_latency},
                 {"l1_miss_overhead", c.l1_miss_overhead},
                 {"llc_array_cycles", c.llc_array_cycles},
                 {"div_cycles", rc.sim.div_cycles}};
  j["mem_bytes"] = rc.sim.mem_bytes;
  j["max_cycles"] = rc.max_cycles;
  j["replacement"] = rc.sim.replacement == Replacement::Nru ? "nru" : "random";
  return j;
}

RunConfig parse_json_value(const json& j) {
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad JSON: ") + e.what());
  }
}

uint32_t align_up(uint64_t v, uint32_t a) { return static_cast<uint32_t>((v + a - 1) / a * a); }

struct Layout {
  std::vector<uint32_t> arrays;
  uint32_t end = 0;
};

Layout place_arrays(unsigned count, uint64_t bytes) {
  Layout l;
  uint64_t at = kDataBase;
  for (unsigned i = 0; i < count; ++i) {
    l.arrays.push_back(static_cast<uint32_t>(at));
    at = align_up(at + bytes, kArrayAlign);
  }
  l.end = static_cast<uint32_t>(at);
  return l;
}

std::vector<uint32_t> random_words(uint64_t count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<uint32_t> v(count);
  for (auto& x : v) x = static_cast<uint32_t>(rng());
  return v;
}

std::span<const uint8_t> as_bytes(const std::vector<uint32_t>& v) {
  return {reinterpret_cast<const uint8_t*>(v.data()), v.size() * 4};
}

std::vector<uint32_t> read_words(Core& core, uint32_t addr, uint64_t count) {
  std::vector<uint32_t> out(count);
  auto src = core.memory().memory().span(addr, static_cast<uint32_t>(count * 4));
  std::memcpy(out.data(), src.data(), count * 4);
  return out;
}

std::string first_mismatch(const std::vector<uint32_t>& got, const std::vector<uint32_t>& want) {
  for (std::size_t i = 0; i < want.size(); ++i)
    if (got[i] != want[i])
      return "element " + std::to_string(i) + ": got " + std::to_string(got[i]) + ", want " +
             std::to_string(want[i]);
  return {};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

bool is_bench_name(std::string_view name) {
  return std::find(std::begin(kBenchNames), std::end(kBenchNames), name) != std::end(kBenchNames);
}

RunConfig parse_run_config(std::string_view json_text) { return parse_json_value(parse_text(json_text)); }

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

std::string run_config_json(const RunConfig& config) { return to_json(config).dump(2); }

void apply_seed_override(RunConfig& config) {
  const char* env = std::getenv("VEXSIM_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 0);
  if (*end != '\0') throw ConfigError("VEXSIM_SEED must be an integer");
  config.bench.seed = v;
  config.sim.seed = v;
}

MetricsRow run_bench(const RunConfig& config) {
  MetricsRow row;
  row.bench = config.bench.name;
  row.config = config;
  const std::string& name = config.bench.name;
  const uint64_t bytes = config.bench.bytes;
  const unsigned vlen = config.sim.vlen_bits;
  const uint64_t n = bytes / 4;
  row.elements = n;

  try {
    config.sim.validate();
    if (!is_bench_name(name)) throw ConfigError("unknown benchmark '" + name + "'");
    const unsigned lanes = vlen / 32;
    const bool vector = name == "memcpy" || name == "sort_simd" || name == "psum_simd";
    if (bytes == 0 || bytes % 4) throw ConfigError("bench.bytes must be a positive multiple of 4");
    if (vector && bytes % (vlen / 8)) throw ConfigError("bench.bytes must be a multiple of VLEN/8");
    if (name.starts_with("stream") && n % 8) throw ConfigError("stream benchmarks need a multiple of 8 elements");
    if (name.starts_with("sort") && (!std::has_single_bit(n) || n < 2 || (name == "sort_simd" && n < 2 * lanes)))
      throw ConfigError("sort needs a power-of-two element count of at least 2 * lanes");
    if (name == "psum_simd" && n % (2 * lanes)) throw ConfigError("psum_simd needs a multiple of 2 * lanes elements");
    if (name == "psum_scalar" && n % 4) throw ConfigError("psum_scalar needs a multiple of 4 elements");

    const unsigned arrays = name.starts_with("stream") ? 3 : 2;
    const Layout layout = place_arrays(arrays, bytes);
    if (uint64_t{layout.end} > uint64_t{config.sim.mem_base} + config.sim.mem_bytes)
      throw ConfigError("mem_bytes too small for the benchmark data");

    const Image image = assemble(kernel_source(name, vlen));
    Core core(config.sim);
    core.load_image(image);

    const uint32_t a = layout.arrays[0], b = layout.arrays[1];
    const uint32_t c = arrays > 2 ? layout.arrays[2] : 0;
    const uint32_t scalar = 3 + static_cast<uint32_t>(config.bench.seed % 5);
    std::vector<uint32_t> input;
    if (!name.starts_with("stream")) {
      input = random_words(n, config.bench.seed);
      core.poke(a, as_bytes(input));
    }
    if (name.starts_with("stream")) {
      core.set_reg(10, a);
      core.set_reg(11, b);
      core.set_reg(12, c);
      core.set_reg(13, static_cast<uint32_t>(n));
      core.set_reg(14, scalar);
    } else {
      core.set_reg(10, a);
      core.set_reg(11, b);
      core.set_reg(12, static_cast<uint32_t>(name == "memcpy" ? bytes : n));
    }

    const ExecStats& st = core.run(config.max_cycles);
    row.exec = st;
    row.total_cycles = st.cycles;
    row.instructions = st.retired;
    row.mem = st.mem;
    if (st.stop != StopReason::Exited || st.exit_code != 0) {
      row.error = "run " + std::string(stop_reason_name(st.stop));
      if (st.trap) row.error += ": " + st.trap_message;
      return row;
    }
    const auto cycles_at = [&](unsigned lo, unsigned hi) {
      return uint64_t{core.reg(lo)} | uint64_t{core.reg(hi)} << 32;
    };
    row.timed_cycles = cycles_at(30, 31) - cycles_at(26, 27);
    core.flush();

    std::vector<uint32_t> want;
    std::vector<uint32_t> got;
    if (name == "memcpy") {
      want = input;
      got = read_words(core, b, n);
      row.bytes_moved = 2 * bytes;
    } else if (name.starts_with("stream")) {
      want.resize(n);
      for (uint64_t i = 0; i < n; ++i) {
        const auto ai = static_cast<uint32_t>(i), bi = static_cast<uint32_t>(2 * i + 1);
        if (name == "stream_copy") want[i] = ai;
        else if (name == "stream_scale") want[i] = scalar * ai;
        else if (name == "stream_add") want[i] = ai + bi;
        else want[i] = ai + scalar * bi;
      }
      got = read_words(core, c, n);
      const bool two = name == "stream_copy" || name == "stream_scale";
      row.bytes_moved = (two ? 2 : 3) * bytes;
    } else if (name.starts_with("sort")) {
      std::vector<int32_t> keys(input.begin(), input.end());
      std::sort(keys.begin(), keys.end());
      want.assign(keys.begin(), keys.end());
      const uint32_t result = core.reg(25);
      if (result != a && result != b) throw std::runtime_error("sort result pointer is invalid");
      got = read_words(core, result, n);
      row.bytes_moved = bytes;
    } else {
      want.resize(n);
      uint32_t acc = 0;
      for (uint64_t i = 0; i < n; ++i) want[i] = acc += input[i];
      got = read_words(core, b, n);
      row.bytes_moved = 2 * bytes;
    }
    if (const std::string diff = first_mismatch(got, want); !diff.empty()) {
      row.error = "ValidationFailed: " + diff;
      return row;
    }
    row.validated = true;
    if (row.timed_cycles > 0)
      row.mbps = static_cast<double>(row.bytes_moved) * config.sim.cache.modeled_frequency_mhz /
                 static_cast<double>(row.timed_cycles);
  } catch (const ConfigError& e) {
    row.error = std::string("ConfigInvalid: ") + e.what();
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::string csv_header() {
  return "csv_version,bench,vlen_bits,il1_sets,il1_block_bits,dl1_sets,dl1_ways,dl1_block_bits,"
         "llc_sets,llc_ways,llc_block_bits,llc_subblocks,bus_width_bits,beats_per_cycle,"
         "setup_cycles,freq_mhz,data_bytes,seed,cycles,total_cycles,instructions,bytes_moved,"
         "mbps,il1_hits,il1_misses,dl1_hits,dl1_misses,dl1_writebacks,llc_hits,llc_misses,"
         "llc_writebacks,burst_reads,burst_writes,validated,error\n";
}

std::string csv_row(const MetricsRow& r) {
  const SimConfig& s = r.config.sim;
  const CacheConfig& c = s.cache;
  const MemStats& m = r.mem;
  std::ostringstream o;
  char mbps[32], freq[32];
  std::snprintf(mbps, sizeof mbps, "%.3f", r.mbps);
  std::snprintf(freq, sizeof freq, "%g", c.modeled_frequency_mhz);
  o << kCsvVersion << ',' << csv_escape(r.bench) << ',' << s.vlen_bits << ',' << c.il1_sets << ','
    << c.il1_block_bits << ',' << c.dl1_sets << ',' << c.dl1_ways << ',' << c.dl1_block_bits << ','
    << c.llc_sets << ',' << c.llc_ways << ',' << c.llc_block_bits << ',' << c.llc_subblocks << ','
    << c.bus_width_bits << ',' << c.beats_per_cycle << ',' << c.mem_setup_latency_cycles << ','
    << freq << ',' << r.config.bench.bytes << ',' << r.config.bench.seed << ',' << r.timed_cycles
    << ',' << r.total_cycles << ',' << r.instructions << ',' << r.bytes_moved << ',' << mbps << ','
    << m.il1_hits << ',' << m.il1_misses << ',' << m.dl1_hits << ',' << m.dl1_misses << ','
    << m.dl1_writebacks << ',' << m.llc_hits << ',' << m.llc_misses << ',' << m.llc_writebacks << ','
    << m.burst_reads << ',' << m.burst_writes << ',' << (r.validated ? "true" : "false") << ','
    << csv_escape(r.error) << '\n';
  return o.str();
}

std::string to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = csv_header();
  for (const auto& r : rows) out += csv_row(r);
  return out;
}

SweepGrid parse_sweep_grid(std::string_view json_text) {
  const json g = parse_text(json_text);
  if (!g.is_object()) throw ConfigError("grid must be a JSON object");
  check_keys(g, {"base", "points", "axes", "benches"}, "grid");
  const json base = g.value("base", json::object());

  std::vector<json> raw;
  if (g.contains("points")) {
    for (const auto& p : g["points"]) {
      json merged = base;
      merged.merge_patch(p);
      raw.push_back(std::move(merged));
    }
  }
  if (g.contains("axes")) {
    std::vector<json> combos{base};
    for (const auto& [key, values] : g["axes"].items()) {
      if (!values.is_array() || values.empty()) throw ConfigError("axis '" + key + "' needs a value list");
      std::string ptr = "/" + key;
      std::replace(ptr.begin(), ptr.end(), '.', '/');
      std::vector<json> next;
      for (const auto& c : combos)
        for (const auto& v : values) {
          json j = c;
          j[json::json_pointer(ptr)] = v;
          next.push_back(std::move(j));
        }
      combos = std::move(next);
    }
    raw.insert(raw.end(), combos.begin(), combos.end());
  }
  if (!g.contains("points") && !g.contains("axes")) raw.push_back(base);

  SweepGrid grid;
  for (const auto& j : raw) {
    GridPoint p;
    try {
      p.config = parse_json_value(j);
    } catch (const ConfigError& e) {
      p.error = std::string("ConfigInvalid: ") + e.what();
    }
    grid.points.push_back(std::move(p));
  }
  if (g.contains("benches"))
    for (const auto& b : g["benches"]) grid.benches.push_back(b.get<std::string>());
  return grid;
}

namespace {

struct Job {
  const GridPoint* point;
  std::string bench;
};

std::vector<Job> sweep_jobs(const SweepGrid& grid) {
  std::vector<Job> jobs;
  for (const auto& p : grid.points) {
    if (grid.benches.empty()) jobs.push_back({&p, p.config.bench.name});
    for (const auto& b : grid.benches) jobs.push_back({&p, b});
  }
  return jobs;
}

MetricsRow run_job(const Job& job) {
  if (!job.point->error.empty()) {
    MetricsRow row;
    row.bench = job.bench;
    row.config = job.point->config;
    row.error = job.point->error;
    return row;
  }
  RunConfig rc = job.point->config;
  rc.bench.name = job.bench;
  return run_bench(rc);
}

}  // namespace

std::vector<MetricsRow> sweep(const SweepGrid& grid) {
  const auto jobs = sweep_jobs(grid);
  std::vector<MetricsRow> rows(jobs.size());
  const auto count = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) rows[static_cast<std::size_t>(i)] = run_job(jobs[static_cast<std::size_t>(i)]);
  return rows;
}

std::vector<MetricsRow> sweep_serial(const SweepGrid& grid) {
  std::vector<MetricsRow> rows;
  for (const auto& job : sweep_jobs(grid)) rows.push_back(run_job(job));
  return rows;
}

}  // namespace vexsim
