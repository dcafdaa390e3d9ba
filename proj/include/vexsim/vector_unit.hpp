#pragma once

// Registry and pipeline model for custom SIMD instructions.
//
// Each registered instruction carries a fixed pipeline length. Issue captures
// the operand values and the destination names, runs the semantics, and parks
// the results in a slot that is written back exactly `latency` cycles later,
// so a non-blocking instruction can accept a new call every cycle.

#include <any>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vexsim/isa.hpp"
#include "vexsim/networks.hpp"

namespace vexsim {

inline constexpr unsigned kMaxVlenBits = 1024;
inline constexpr unsigned kMaxLanes = kMaxVlenBits / 32;

/// One vector register; only the first VLEN/32 lanes are meaningful.
using VecReg = std::array<uint32_t, kMaxLanes>;

class VectorRegisterFile {
 public:
  explicit VectorRegisterFile(unsigned vlen_bits = 256);

  unsigned vlen_bits() const { return vlen_bits_; }
  unsigned lanes() const { return vlen_bits_ / 32; }
  unsigned bytes() const { return vlen_bits_ / 8; }

  /// v0 reads as zero.
  const VecReg& read(unsigned index) const { return regs_[index]; }
  /// Writes to v0 are dropped.
  void write(unsigned index, const VecReg& value) {
    if (index != 0) regs_[index] = value;
  }

 private:
  unsigned vlen_bits_;
  std::array<VecReg, kNumVecRegs> regs_{};
};

struct RegisterFiles {
  std::array<uint32_t, 32> x{};
  VectorRegisterFile v;

  explicit RegisterFiles(unsigned vlen_bits = 256) : v(vlen_bits) {}
  void write_x(unsigned r, uint32_t value) {
    if (r != 0) x[r] = value;
  }
};

/// Cycle at which each register's in-flight writer (if any) completes.
struct Scoreboard {
  std::array<uint64_t, 32> x_ready{};
  std::array<uint64_t, kNumVecRegs> v_ready{};

  bool x_pending(unsigned r, uint64_t now) const { return r != 0 && x_ready[r] > now; }
  bool v_pending(unsigned r, uint64_t now) const { return r != 0 && v_ready[r] > now; }
};

struct MemRequest {
  enum class Kind : uint8_t { Load, Store };
  Kind kind = Kind::Load;
  uint32_t addr = 0;
  VecReg data{};  // store payload
};

struct CustomInputs {
  uint32_t rs1 = 0;
  uint32_t rs2 = 0;    // S' only
  VecReg vrs1{};
  VecReg vrs2{};       // I' only
  VecReg vrd1_src{};   // value named by the vrd1 field, for store-like instructions
  unsigned lanes = 0;
};

struct CustomOutputs {
  uint32_t rd = 0;
  VecReg vrd1{};
  VecReg vrd2{};
  std::optional<MemRequest> mem;  // a Load result lands in vrd1
};

using CustomSemantics = std::function<void(const CustomInputs&, CustomOutputs&, std::any& state)>;

/// Which operand fields an instruction reads and writes. Drives the hazard
/// checks and the writeback.
struct OperandUse {
  bool reads_rs1 = true;
  bool reads_rs2 = true;
  bool reads_vrs1 = true;
  bool reads_vrs2 = true;
  bool reads_vrd1 = false;  // store-like: the vrd1 field names a source
  bool writes_rd = true;
  bool writes_vrd1 = true;
  bool writes_vrd2 = true;
};

struct CustomInstrDescriptor {
  std::string mnemonic;
  unsigned slot = 0;
  unsigned funct3 = 0;
  CustomType type = CustomType::IPrime;
  unsigned latency_cycles = 1;
  bool blocking = false;
  bool uses_memory = false;  // issue waits until the DL1 accepts requests
  OperandUse use;
  CustomSemantics semantics;
  std::any state;
};

struct PipelineSlot {
  uint64_t seq = 0;
  std::size_t handle = 0;
  uint64_t issued_at = 0;
  uint64_t completes_at = 0;
  uint8_t rd = 0, vrd1 = 0, vrd2 = 0;
  bool write_rd = false, write_vrd1 = false, write_vrd2 = false;
  uint32_t rd_value = 0;
  VecReg vrd1_value{}, vrd2_value{};
};

enum class IssueStatus : uint8_t { Accepted, StallData, StallStructural };

struct IssueResult {
  IssueStatus status = IssueStatus::Accepted;
  uint64_t retry_at = 0;       // for stalls: earliest cycle the hazard clears
  uint64_t completes_at = 0;   // for Accepted
  std::size_t handle = 0;
};

/// Vector memory traffic of c0_lv/c0_sv-style instructions. Returns the access
/// latency in cycles; may throw TrapError.
class VectorMemoryPort {
 public:
  virtual ~VectorMemoryPort() = default;
  virtual unsigned vector_access(MemRequest& request, std::span<uint8_t> bytes, uint64_t now) = 0;
};

struct Retirement {
  uint64_t seq;
  std::size_t handle;
  uint64_t issued_at;
  uint64_t completes_at;
};

class VectorUnit {
 public:
  /// Registers the built-ins when `with_builtins` is set.
  explicit VectorUnit(unsigned vlen_bits = 256, bool with_builtins = true);
  // Descriptors may share state (the scan carry), so copies would alias it.
  VectorUnit(const VectorUnit&) = delete;
  VectorUnit& operator=(const VectorUnit&) = delete;

  /// Throws DuplicateSlot if (slot, funct3) is taken.
  std::size_t register_custom_instr(CustomInstrDescriptor desc);

  const CustomIsa& isa() const { return isa_; }
  unsigned vlen_bits() const { return vlen_bits_; }
  unsigned lanes() const { return vlen_bits_ / 32; }

  std::optional<std::size_t> find(unsigned slot, unsigned funct3) const;
  const CustomInstrDescriptor& descriptor(std::size_t handle) const { return descs_[handle]; }
  CustomInstrDescriptor& descriptor(std::size_t handle) { return descs_[handle]; }

  /// Tries to start `instr` at cycle `now`. On acceptance the scoreboard marks
  /// the destinations busy until completion. Throws TrapError from memory.
  IssueResult issue(const Instr& instr, const RegisterFiles& regs, Scoreboard& sb, uint64_t now,
                    VectorMemoryPort* mem = nullptr);

  /// Writes back every slot completing exactly at `now`, in issue order.
  std::vector<Retirement> tick(uint64_t now, RegisterFiles& regs);

  /// Writes back every slot completing at or before `now`, ordered by
  /// (completion, issue). Equivalent to tick() on each cycle up to `now`.
  void retire_through(uint64_t now, RegisterFiles& regs, std::vector<Retirement>* out = nullptr);

  std::size_t in_flight() const { return slots_.size(); }
  /// Completion cycle of the last in-flight slot, or 0.
  uint64_t drain_cycle() const;

 private:
  void write_back(const PipelineSlot& slot, RegisterFiles& regs);

  unsigned vlen_bits_;
  CustomIsa isa_;
  std::vector<CustomInstrDescriptor> descs_;
  std::array<std::optional<std::size_t>, kNumCustomSlots * 8> by_point_{};
  std::vector<uint64_t> busy_until_;
  std::vector<PipelineSlot> slots_;  // issue order
  uint64_t next_seq_ = 0;
  uint64_t earliest_ = UINT64_MAX;
};

/// The built-in instruction set for a given vector width.
std::vector<CustomInstrDescriptor> builtin_descriptors(unsigned vlen_bits);

/// Default pipeline lengths of the network-based built-ins.
unsigned sort_latency(unsigned vlen_bits);
unsigned merge_latency(unsigned vlen_bits);
unsigned psum_latency(unsigned vlen_bits);

}  // namespace vexsim
