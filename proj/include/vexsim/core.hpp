#pragma once

// Single-issue RV32IM core with one pipeline stage. Simple instructions take a
// cycle and are not tracked; loads and custom instructions mark their
// destinations in a scoreboard that stalls later readers.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vexsim/image.hpp"
#include "vexsim/isa.hpp"
#include "vexsim/memory.hpp"
#include "vexsim/trap.hpp"
#include "vexsim/vector_unit.hpp"

namespace vexsim {

struct SimConfig {
  unsigned vlen_bits = 256;
  CacheConfig cache;
  unsigned div_cycles = 32;
  uint32_t mem_base = 0;
  uint32_t mem_bytes = 32u << 20;
  Replacement replacement = Replacement::Nru;
  uint64_t seed = 1;
  /// Counts reads of registers that still have an in-flight writer.
  bool check_scoreboard = false;
  bool trace = false;

  /// Throws ConfigError.
  void validate() const;
};

namespace host {
inline constexpr uint32_t kWrite = 64;
inline constexpr uint32_t kExit = 93;
inline constexpr uint32_t kCycles = 1000;  // a0 = low word, a1 = high word
}  // namespace host

struct StepResult {
  bool retired = false;
  unsigned cycles_consumed = 1;
  std::optional<TrapKind> trap;
};

enum class StopReason : uint8_t { Running, Exited, Trapped, MaxCyclesExceeded };

std::string_view stop_reason_name(StopReason reason);

struct ExecStats {
  uint64_t cycles = 0;
  uint64_t consumed = 0;  // sum of per-instruction cycles, excluding stalls
  uint64_t retired = 0;

  uint64_t alu = 0, branch = 0, jump = 0, load = 0, store = 0, muldiv = 0, system = 0;
  std::map<std::string, uint64_t> custom;

  uint64_t stall_load_use = 0;
  uint64_t stall_vector_data = 0;
  uint64_t stall_structural = 0;
  uint64_t stall_icache = 0;
  uint64_t stall_dcache = 0;

  uint64_t scoreboard_violations = 0;

  StopReason stop = StopReason::Running;
  int32_t exit_code = 0;
  std::optional<TrapKind> trap;
  uint32_t trap_pc = 0;
  std::string trap_message;

  MemStats mem;

  uint64_t stalls() const {
    return stall_load_use + stall_vector_data + stall_structural + stall_icache + stall_dcache;
  }
  bool operator==(const ExecStats&) const = default;
};

struct TraceEntry {
  uint32_t pc;
  uint32_t word;
  uint64_t issue;
  uint64_t complete;
};

class Core {
 public:
  explicit Core(const SimConfig& config);
  ~Core();
  Core(const Core&) = delete;
  Core& operator=(const Core&) = delete;

  /// Copies the image into memory (untimed), sets pc to its entry and sp to
  /// the top of memory.
  void load_image(const Image& image);

  StepResult step();
  /// Runs until exit, a trap, or the cycle budget is spent.
  const ExecStats& run(uint64_t max_cycles = UINT64_MAX);

  uint32_t pc() const { return pc_; }
  void set_pc(uint32_t pc) { pc_ = pc; }
  uint32_t reg(unsigned r) const { return regs_.x[r]; }
  void set_reg(unsigned r, uint32_t value) { regs_.write_x(r, value); }
  const VecReg& vreg(unsigned r) const { return regs_.v.read(r); }
  uint64_t cycle() const { return cycle_; }
  bool halted() const { return halted_; }

  /// Stats with memory counters filled in.
  const ExecStats& stats();
  const std::string& output() const { return output_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

  /// Untimed, coherent view of memory.
  void peek(uint32_t addr, std::span<uint8_t> out) const { mem_.peek(addr, out); }
  uint32_t peek32(uint32_t addr) const;
  /// Untimed write straight to main memory. Only valid while the caches do
  /// not hold the range (before the program runs or after flush()).
  void poke(uint32_t addr, std::span<const uint8_t> bytes);

  /// Retires in-flight vector results and writes dirty lines back (untimed).
  void flush();

  MemHierarchy& memory() { return mem_; }
  VectorUnit& vector_unit() { return vu_; }
  const SimConfig& config() const { return config_; }

 private:
  class DataPort;

  void execute(const Instr& in, uint64_t& now, unsigned& cost);
  void wait_sources(const Instr& in, uint64_t& now);
  void wait_dcache(uint64_t& now);
  void stall_until(uint64_t until, uint64_t& now, uint64_t& counter);
  void check_reads(const Instr& in, uint64_t now);
  void host_call(uint64_t now);
  void count_retired(const Instr& in);

  SimConfig config_;
  MainMemory main_;
  MemHierarchy mem_;
  VectorUnit vu_;
  std::unique_ptr<DataPort> port_;
  RegisterFiles regs_;
  Scoreboard sb_;
  std::array<bool, 32> x_load_writer_{};  // pending writer of x[r] is a scalar load
  std::array<uint64_t, 32> x_deferred_{};  // custom result for x[r] not yet written

  uint32_t pc_ = 0;
  uint64_t cycle_ = 0;
  bool halted_ = false;
  ExecStats stats_;
  std::string output_;
  std::vector<TraceEntry> trace_;
};

}  // namespace vexsim
