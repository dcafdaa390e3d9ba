// vexsim command-line driver.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vexsim/assembler.hpp"
#include "vexsim/harness.hpp"
#include "vexsim/image.hpp"

namespace fs = std::filesystem;
using namespace vexsim;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

RunConfig config_or_default(const std::string& path) {
  RunConfig rc = path.empty() ? RunConfig{} : load_run_config(path);
  apply_seed_override(rc);
  return rc;
}

void print_row(const MetricsRow& r) {
  std::fprintf(stderr, "%-13s %s  cycles=%llu instr=%llu bytes=%llu  %.2f MB/s%s%s\n", r.bench.c_str(),
               r.validated ? "ok  " : "FAIL", static_cast<unsigned long long>(r.timed_cycles),
               static_cast<unsigned long long>(r.instructions),
               static_cast<unsigned long long>(r.bytes_moved), r.mbps, r.error.empty() ? "" : "  ",
               r.error.c_str());
}

std::string_view baseline_of(std::string_view bench) {
  if (bench == "sort_simd") return "sort_scalar";
  if (bench == "psum_simd") return "psum_scalar";
  if (bench == "memcpy") return "stream_copy";
  return {};
}

int cmd_asm(const std::string& src, const std::string& out, uint32_t base) {
  const Image img = assemble(read_text(src), CustomIsa::builtin(), AsmOptions{.base = base});
  write_image_file(out, img);
  write_text(out + ".sym", format_symbols(img));
  return 0;
}

int cmd_run(const std::string& img_path, const std::string& config_path, uint64_t max_cycles,
            bool show_stats) {
  Image img = read_image_file(img_path);
  RunConfig rc = config_or_default(config_path);
  if (max_cycles) rc.max_cycles = max_cycles;
  Core core(rc.sim);
  core.load_image(img);
  const ExecStats& st = core.run(rc.max_cycles);
  std::cout << core.output() << std::flush;
  if (show_stats || st.stop != StopReason::Exited) {
    std::fprintf(stderr, "stop=%s exit=%d cycles=%llu retired=%llu stalls=%llu\n",
                 std::string(stop_reason_name(st.stop)).c_str(), st.exit_code,
                 static_cast<unsigned long long>(st.cycles), static_cast<unsigned long long>(st.retired),
                 static_cast<unsigned long long>(st.stalls()));
    if (st.trap) std::fprintf(stderr, "trap at 0x%08x: %s\n", st.trap_pc, st.trap_message.c_str());
  }
  return st.stop == StopReason::Exited && st.exit_code == 0 ? 0 : 1;
}

int cmd_bench(const std::string& name, const std::string& config_path, const std::string& csv,
              uint64_t bytes, bool compare) {
  RunConfig rc = config_or_default(config_path);
  rc.bench.name = name;
  if (bytes) rc.bench.bytes = bytes;
  std::vector<MetricsRow> rows{run_bench(rc)};
  print_row(rows.back());
  if (compare) {
    const auto base = baseline_of(name);
    if (base.empty()) throw std::runtime_error("no baseline for " + name);
    rc.bench.name = base;
    rows.push_back(run_bench(rc));
    print_row(rows.back());
    if (rows[0].validated && rows[1].validated && rows[0].timed_cycles > 0) {
      // memcpy is compared by throughput; the others by time for equal data.
      const double ratio = name == "memcpy" ? rows[0].mbps / rows[1].mbps
                                            : static_cast<double>(rows[1].timed_cycles) /
                                                  static_cast<double>(rows[0].timed_cycles);
      std::fprintf(stderr, "speedup %s over %s: %.2fx\n", name.c_str(), std::string(base).c_str(), ratio);
    }
  }
  if (!csv.empty()) write_text(csv, to_csv(rows));
  for (const auto& r : rows)
    if (!r.validated) return 1;
  return 0;
}

int cmd_sweep(const std::string& grid_path, const std::string& csv, bool serial) {
  SweepGrid grid = parse_sweep_grid(read_text(grid_path));
  for (auto& p : grid.points) apply_seed_override(p.config);
  const auto rows = serial ? sweep_serial(grid) : sweep(grid);
  for (const auto& r : rows) print_row(r);
  const std::string text = to_csv(rows);
  if (csv.empty()) std::cout << text;
  else write_text(csv, text);
  for (const auto& r : rows)
    if (!r.validated) return 1;
  return 0;
}

int cmd_disasm(const std::string& img_path) {
  Image img = read_image_file(img_path);
  if (const fs::path sym = img_path + ".sym"; fs::exists(sym)) parse_symbols(read_text(sym), img);
  std::cout << link_and_dump(img);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RV32IM simulator with custom SIMD instructions"};
  app.require_subcommand(1);

  std::string src, out = "a.vxs", img, config, csv, grid, bench;
  uint32_t base = 0;
  uint64_t max_cycles = 0, bytes = 0;
  bool stats = false, compare = false, serial = false;

  auto* asm_cmd = app.add_subcommand("asm", "assemble a source file into an image");
  asm_cmd->add_option("src", src, "assembly source")->required();
  asm_cmd->add_option("-o,--output", out, "image path (symbols go to <image>.sym)");
  asm_cmd->add_option("--base", base, "load address of .text");

  auto* run_cmd = app.add_subcommand("run", "run an image");
  run_cmd->add_option("image", img, "image file")->required();
  run_cmd->add_option("--config", config, "JSON configuration");
  run_cmd->add_option("--max-cycles", max_cycles, "cycle budget");
  run_cmd->add_flag("--stats", stats, "print execution statistics");

  auto* bench_cmd = app.add_subcommand("bench", "run a bundled benchmark");
  bench_cmd->add_option("name", bench, "benchmark name")->required();
  bench_cmd->add_option("--config", config, "JSON configuration");
  bench_cmd->add_option("--csv", csv, "write the metrics row(s) here");
  bench_cmd->add_option("--bytes", bytes, "data size per array");
  bench_cmd->add_flag("--compare", compare, "also run the scalar baseline and print the ratio");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a configuration grid");
  sweep_cmd->add_option("--grid", grid, "grid JSON")->required();
  sweep_cmd->add_option("--csv", csv, "output CSV (stdout if omitted)");
  sweep_cmd->add_flag("--serial", serial, "run grid points one after another");

  auto* disasm_cmd = app.add_subcommand("disasm", "list an image");
  disasm_cmd->add_option("image", img, "image file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*asm_cmd) return cmd_asm(src, out, base);
    if (*run_cmd) return cmd_run(img, config, max_cycles, stats);
    if (*bench_cmd) return cmd_bench(bench, config, csv, bytes, compare);
    if (*sweep_cmd) return cmd_sweep(grid, csv, serial);
    if (*disasm_cmd) return cmd_disasm(img);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
