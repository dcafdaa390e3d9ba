#pragma once

// Three-cache hierarchy: direct-mapped IL1, set-associative DL1 and a unified
// LLC with very wide, sub-blocked lines, backed by a flat main memory reached
// through a burst-modelled bus.
//
// Data really moves between levels (the hierarchy is write-back), while timing
// is tracked separately: every request carries the cycle it is issued at and
// gets back the cycle its data is usable.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "vexsim/trap.hpp"

namespace vexsim {

struct CacheConfig {
  unsigned il1_sets = 64;
  unsigned il1_block_bits = 256;
  unsigned dl1_sets = 32;
  unsigned dl1_ways = 4;
  unsigned dl1_block_bits = 256;
  unsigned llc_sets = 32;
  unsigned llc_ways = 4;
  unsigned llc_block_bits = 16384;
  unsigned llc_subblocks = 32;
  unsigned bus_width_bits = 128;
  unsigned beats_per_cycle = 1;
  unsigned mem_setup_latency_cycles = 30;
  double modeled_frequency_mhz = 150.0;

  // Timing of the on-chip paths.
  unsigned dl1_hit_latency = 3;     // issue to dependent use
  unsigned l1_miss_overhead = 4;    // miss detect + request + refill, around the LLC service
  unsigned llc_array_cycles = 1;    // read or write of one L1-sized block

  unsigned subblock_bits() const { return llc_block_bits / llc_subblocks; }

  /// Throws ConfigError. `vlen_bits` ties the L1 block size to the vector width.
  void validate(unsigned vlen_bits) const;
};

enum class Replacement : uint8_t { Nru, Random };
enum class AccessKind : uint8_t { Read, Write };

struct MemStats {
  uint64_t il1_hits = 0, il1_misses = 0;
  uint64_t dl1_hits = 0, dl1_misses = 0, dl1_writebacks = 0;
  uint64_t llc_hits = 0, llc_misses = 0, llc_writebacks = 0;
  uint64_t llc_read_requests = 0, llc_write_requests = 0;
  uint64_t burst_reads = 0, burst_writes = 0, total_beats = 0;
  uint64_t stall_cycles = 0;  // cycles requesters spent waiting beyond a hit

  uint64_t il1_accesses() const { return il1_hits + il1_misses; }
  uint64_t dl1_accesses() const { return dl1_hits + dl1_misses; }
  uint64_t llc_accesses() const { return llc_hits + llc_misses; }

  bool operator==(const MemStats&) const = default;
};

struct AccessResult {
  uint32_t value = 0;    // zero-extended read data for accesses up to 32 bits
  unsigned latency = 0;  // cycles from issue to dependent use
  bool hit = false;
};

struct FetchResult {
  uint32_t word = 0;
  unsigned stall = 0;  // cycles added before the instruction can execute
  bool hit = false;
};

struct LlcResult {
  uint64_t ready_at = 0;
  unsigned latency = 0;
  bool hit = false;
};

class MainMemory {
 public:
  MainMemory(uint32_t base, uint32_t size);

  uint32_t base() const { return base_; }
  uint32_t size() const { return static_cast<uint32_t>(bytes_.size()); }
  bool contains(uint32_t addr, uint64_t len) const;

  /// Throws TrapError(OutOfRange).
  std::span<uint8_t> span(uint32_t addr, uint32_t len);
  std::span<const uint8_t> span(uint32_t addr, uint32_t len) const;

  uint32_t load32(uint32_t addr) const;
  void store32(uint32_t addr, uint32_t value);

 private:
  uint32_t base_;
  std::vector<uint8_t> bytes_;
};

/// Tag/state/data arrays of one set-associative cache. Lines are identified
/// by their block number (address / block size).
class CacheLevel {
 public:
  struct Line {
    uint32_t block = 0;
    bool valid = false;
    bool dirty = false;
    bool nru = true;
    uint64_t fill_start = 0;  // LLC only: cycle the filling burst started
  };

  CacheLevel(unsigned sets, unsigned ways, unsigned block_bytes, Replacement policy,
             uint64_t seed = 1);

  unsigned sets() const { return sets_; }
  unsigned ways() const { return ways_; }
  unsigned block_bytes() const { return block_bytes_; }

  unsigned set_of(uint32_t block) const { return block & (sets_ - 1); }
  /// Way holding `block`, or -1.
  int lookup(uint32_t block) const;

  /// First invalid way, otherwise the policy's choice.
  unsigned victim(unsigned set);

  /// Marks an access: clears the way's NRU bit and, if that leaves the set
  /// without a candidate, sets the bit of every other way.
  void touch(unsigned set, unsigned way);

  Line& line(unsigned set, unsigned way) { return lines_[set * ways_ + way]; }
  const Line& line(unsigned set, unsigned way) const { return lines_[set * ways_ + way]; }
  std::span<uint8_t> data(unsigned set, unsigned way) {
    return {data_.data() + (std::size_t{set} * ways_ + way) * block_bytes_, block_bytes_};
  }
  std::span<const uint8_t> data(unsigned set, unsigned way) const {
    return {data_.data() + (std::size_t{set} * ways_ + way) * block_bytes_, block_bytes_};
  }

 private:
  unsigned sets_, ways_, block_bytes_;
  Replacement policy_;
  std::mt19937_64 rng_;
  std::vector<Line> lines_;
  std::vector<uint8_t> data_;
};

/// Burst cost: setup + ceil(ceil(block/bus) / beats_per_cycle).
unsigned burst_latency(unsigned block_bits, unsigned bus_width_bits, unsigned beats_per_cycle,
                       unsigned setup_cycles);

class MemHierarchy {
 public:
  MemHierarchy(const CacheConfig& config, MainMemory& memory,
               Replacement policy = Replacement::Nru, uint64_t seed = 1);

  /// Loads or stores `data.size()` bytes (1, 2, 4 or one L1 block). Reads fill
  /// `data`; writes take it. Throws TrapError on misaligned or out-of-range
  /// addresses.
  AccessResult data_access(uint32_t addr, AccessKind kind, std::span<uint8_t> data, uint64_t now);

  /// Narrow helpers over data_access. Reads zero-extend.
  AccessResult read(uint32_t addr, unsigned bytes, uint64_t now);
  AccessResult write(uint32_t addr, unsigned bytes, uint32_t value, uint64_t now);

  FetchResult fetch_instr(uint32_t pc, uint64_t now);

  /// One L1-block request at `now`; `data` is one L1 block.
  LlcResult llc_access(uint32_t addr, AccessKind kind, std::span<uint8_t> data, uint64_t now);

  /// Earliest cycle the DL1 accepts another access (it blocks during refills).
  uint64_t dl1_ready_at() const { return dl1_busy_until_; }

  unsigned burst_cycles() const;
  /// Cycles from burst start until sub-block `k` has fully arrived.
  unsigned subblock_arrival(unsigned k) const;

  /// Writes every dirty block down to main memory (untimed).
  void flush_all();

  /// Freshest bytes at [addr, addr+out.size()) without touching cache state.
  void peek(uint32_t addr, std::span<uint8_t> out) const;

  const MemStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

  const CacheConfig& config() const { return config_; }
  const CacheLevel& il1() const { return il1_; }
  const CacheLevel& dl1() const { return dl1_; }
  const CacheLevel& llc() const { return llc_; }
  MainMemory& memory() { return memory_; }
  const MainMemory& memory() const { return memory_; }

 private:
  void check_access(uint32_t addr, uint32_t bytes) const;
  uint64_t refill_l1(CacheLevel& cache, unsigned set, unsigned way, uint32_t block, bool fetch,
                     uint64_t start);

  CacheConfig config_;
  MainMemory& memory_;
  CacheLevel il1_;
  CacheLevel dl1_;
  CacheLevel llc_;
  unsigned l1_block_bytes_;
  unsigned llc_block_bytes_;
  unsigned sub_bytes_;
  uint64_t dl1_busy_until_ = 0;
  uint64_t llc_busy_until_ = 0;
  uint64_t bus_free_at_ = 0;
  MemStats stats_;
};

}  // namespace vexsim
