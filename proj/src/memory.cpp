#include "vexsim/memory.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

namespace vexsim {

namespace {

bool pow2(unsigned v) { return std::has_single_bit(v); }

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::string_view trap_name(TrapKind kind) {
  switch (kind) {
    case TrapKind::IllegalInstruction: return "IllegalInstruction";
    case TrapKind::Misaligned: return "Misaligned";
    case TrapKind::OutOfRange: return "OutOfRange";
    case TrapKind::Ebreak: return "Ebreak";
  }
  return "?";
}

void CacheConfig::validate(unsigned vlen_bits) const {
  require(pow2(vlen_bits) && vlen_bits >= 64, "vlen_bits must be a power of two >= 64");
  require(dl1_block_bits == vlen_bits, "dl1.block_bits must equal vlen_bits");
  require(il1_block_bits == dl1_block_bits, "il1.block_bits must equal dl1.block_bits");
  for (unsigned v : {il1_sets, dl1_sets, dl1_ways, llc_sets, llc_ways, llc_block_bits,
                     llc_subblocks, bus_width_bits})
    require(pow2(v), "cache geometry values must be powers of two");
  require(beats_per_cycle == 1 || beats_per_cycle == 2, "bus.beats_per_cycle must be 1 or 2");
  require(bus_width_bits >= 8, "bus.width_bits must be at least 8");
  require(llc_block_bits >= dl1_block_bits, "llc.block_bits must be >= dl1.block_bits");
  require(llc_subblocks <= llc_block_bits / dl1_block_bits,
          "llc sub-blocks must be at least one dl1 block wide");
  require(subblock_bits() % dl1_block_bits == 0,
          "llc sub-block width must be a multiple of dl1.block_bits");
  require(modeled_frequency_mhz > 0, "freq_mhz must be positive");
  require(dl1_hit_latency >= 1 && l1_miss_overhead >= 1 && llc_array_cycles >= 1,
          "timing parameters must be >= 1");
}

// ---------------------------------------------------------------------------

MainMemory::MainMemory(uint32_t base, uint32_t size) : base_(base), bytes_(size, 0) {}

bool MainMemory::contains(uint32_t addr, uint64_t len) const {
  return addr >= base_ && uint64_t{addr} - base_ + len <= bytes_.size();
}

std::span<uint8_t> MainMemory::span(uint32_t addr, uint32_t len) {
  if (!contains(addr, len))
    throw TrapError(TrapKind::OutOfRange, addr, "address out of range: " + std::to_string(addr));
  return {bytes_.data() + (addr - base_), len};
}

std::span<const uint8_t> MainMemory::span(uint32_t addr, uint32_t len) const {
  if (!contains(addr, len))
    throw TrapError(TrapKind::OutOfRange, addr, "address out of range: " + std::to_string(addr));
  return {bytes_.data() + (addr - base_), len};
}

uint32_t MainMemory::load32(uint32_t addr) const {
  uint32_t v;
  std::memcpy(&v, span(addr, 4).data(), 4);
  return v;
}

void MainMemory::store32(uint32_t addr, uint32_t value) {
  std::memcpy(span(addr, 4).data(), &value, 4);
}

// ---------------------------------------------------------------------------

CacheLevel::CacheLevel(unsigned sets, unsigned ways, unsigned block_bytes, Replacement policy,
                       uint64_t seed)
    : sets_(sets),
      ways_(ways),
      block_bytes_(block_bytes),
      policy_(policy),
      rng_(seed),
      lines_(std::size_t{sets} * ways),
      data_(std::size_t{sets} * ways * block_bytes, 0) {}

int CacheLevel::lookup(uint32_t block) const {
  const unsigned set = set_of(block);
  const Line* row = &lines_[set * ways_];
  for (unsigned w = 0; w < ways_; ++w)
    if (row[w].valid && row[w].block == block) return static_cast<int>(w);
  return -1;
}

unsigned CacheLevel::victim(unsigned set) {
  Line* row = &lines_[set * ways_];
  for (unsigned w = 0; w < ways_; ++w)
    if (!row[w].valid) return w;
  if (policy_ == Replacement::Random) return static_cast<unsigned>(rng_() % ways_);
  for (unsigned w = 0; w < ways_; ++w)
    if (row[w].nru) return w;
  return 0;  // unreachable while touch() keeps a candidate
}

void CacheLevel::touch(unsigned set, unsigned way) {
  Line* row = &lines_[set * ways_];
  row[way].nru = false;
  for (unsigned w = 0; w < ways_; ++w)
    if (row[w].nru) return;
  for (unsigned w = 0; w < ways_; ++w)
    if (w != way) row[w].nru = true;
}

// ---------------------------------------------------------------------------

unsigned burst_latency(unsigned block_bits, unsigned bus_width_bits, unsigned beats_per_cycle,
                       unsigned setup_cycles) {
  const uint64_t beats = ceil_div(block_bits, bus_width_bits);
  return setup_cycles + static_cast<unsigned>(ceil_div(beats, beats_per_cycle));
}

MemHierarchy::MemHierarchy(const CacheConfig& config, MainMemory& memory, Replacement policy,
                           uint64_t seed)
    : config_(config),
      memory_(memory),
      il1_(config.il1_sets, 1, config.il1_block_bits / 8, Replacement::Nru),
      dl1_(config.dl1_sets, config.dl1_ways, config.dl1_block_bits / 8, policy, seed),
      llc_(config.llc_sets, config.llc_ways, config.llc_block_bits / 8, policy, seed * 7 + 1),
      l1_block_bytes_(config.dl1_block_bits / 8),
      llc_block_bytes_(config.llc_block_bits / 8),
      sub_bytes_(config.subblock_bits() / 8) {
  if (memory.base() % llc_block_bytes_ != 0 || memory.size() % llc_block_bytes_ != 0)
    throw ConfigError("memory base and size must be multiples of the LLC block size");
}

unsigned MemHierarchy::burst_cycles() const {
  return burst_latency(config_.llc_block_bits, config_.bus_width_bits, config_.beats_per_cycle,
                       config_.mem_setup_latency_cycles);
}

unsigned MemHierarchy::subblock_arrival(unsigned k) const {
  const uint64_t beats = ceil_div(uint64_t{k + 1} * config_.subblock_bits(), config_.bus_width_bits);
  return config_.mem_setup_latency_cycles +
         static_cast<unsigned>(ceil_div(beats, config_.beats_per_cycle));
}

void MemHierarchy::check_access(uint32_t addr, uint32_t bytes) const {
  if (addr % bytes != 0)
    throw TrapError(TrapKind::Misaligned, addr, "misaligned " + std::to_string(bytes * 8) +
                                                    "-bit access at " + std::to_string(addr));
  if (!memory_.contains(addr, bytes))
    throw TrapError(TrapKind::OutOfRange, addr, "address out of range: " + std::to_string(addr));
}

LlcResult MemHierarchy::llc_access(uint32_t addr, AccessKind kind, std::span<uint8_t> data,
                                   uint64_t now) {
  const uint64_t t = std::max(now, llc_busy_until_);
  const uint32_t block = addr / llc_block_bytes_;
  const uint32_t offset = addr % llc_block_bytes_ / l1_block_bytes_ * l1_block_bytes_;
  const unsigned sub = offset / sub_bytes_;
  const unsigned set = llc_.set_of(block);
  (kind == AccessKind::Read ? stats_.llc_read_requests : stats_.llc_write_requests)++;

  LlcResult result;
  int way = llc_.lookup(block);
  uint64_t data_at;
  if (way >= 0) {
    ++stats_.llc_hits;
    result.hit = true;
    const auto& line = llc_.line(set, static_cast<unsigned>(way));
    data_at = std::max(t, line.fill_start + subblock_arrival(sub));
  } else {
    ++stats_.llc_misses;
    const unsigned v = llc_.victim(set);
    auto& line = llc_.line(set, v);
    const bool writeback = line.valid && line.dirty;
    if (writeback) {
      // The victim goes to a write buffer and drains after the fill burst.
      const uint32_t victim_addr = line.block * llc_block_bytes_;
      auto dst = memory_.span(victim_addr, llc_block_bytes_);
      auto src = llc_.data(set, v);
      std::copy(src.begin(), src.end(), dst.begin());
      ++stats_.llc_writebacks;
    }
    const uint64_t fill_start = std::max(t, bus_free_at_);
    auto src = memory_.span(block * llc_block_bytes_, llc_block_bytes_);
    auto dst = llc_.data(set, v);
    std::copy(src.begin(), src.end(), dst.begin());
    line = CacheLevel::Line{block, true, false, line.nru, fill_start};

    const unsigned burst = burst_cycles();
    const uint64_t beats = ceil_div(config_.llc_block_bits, config_.bus_width_bits);
    bus_free_at_ = fill_start + burst;
    ++stats_.burst_reads;
    stats_.total_beats += beats;
    if (writeback) {
      bus_free_at_ += burst;
      ++stats_.burst_writes;
      stats_.total_beats += beats;
    }
    way = static_cast<int>(v);
    // A write supplies its whole L1 block, so it does not wait for the fill
    // to reach that sub-block; the remaining bytes merge in behind it.
    data_at = kind == AccessKind::Write ? t : fill_start + subblock_arrival(sub);
  }

  const auto w = static_cast<unsigned>(way);
  llc_.touch(set, w);
  auto bytes = llc_.data(set, w).subspan(offset, l1_block_bytes_);
  if (kind == AccessKind::Read) {
    std::copy(bytes.begin(), bytes.end(), data.begin());
  } else {
    std::copy(data.begin(), data.end(), bytes.begin());
    llc_.line(set, w).dirty = true;
  }

  result.ready_at = data_at + config_.llc_array_cycles;
  result.latency = static_cast<unsigned>(result.ready_at - now);
  llc_busy_until_ = result.ready_at;
  return result;
}

// Writes back the victim (if dirty) and optionally fetches `block` into the
// given line. Returns the cycle the refill is complete.
uint64_t MemHierarchy::refill_l1(CacheLevel& cache, unsigned set, unsigned way, uint32_t block,
                                 bool fetch, uint64_t start) {
  auto& line = cache.line(set, way);
  uint64_t t = start + 1;
  bool waited = false;
  if (line.valid && line.dirty) {
    ++stats_.dl1_writebacks;
    t = llc_access(line.block * l1_block_bytes_, AccessKind::Write, cache.data(set, way), t).ready_at;
    waited = true;
  }
  if (fetch) {
    t = llc_access(block * l1_block_bytes_, AccessKind::Read, cache.data(set, way), t).ready_at;
    waited = true;
  }
  line = CacheLevel::Line{block, true, false, line.nru, 0};
  cache.touch(set, way);
  return waited ? t + (config_.l1_miss_overhead - 1) : start;
}

AccessResult MemHierarchy::data_access(uint32_t addr, AccessKind kind, std::span<uint8_t> data,
                                       uint64_t now) {
  const auto bytes = static_cast<uint32_t>(data.size());
  check_access(addr, bytes);
  const uint32_t block = addr / l1_block_bytes_;
  const uint32_t offset = addr % l1_block_bytes_;
  const unsigned set = dl1_.set_of(block);

  AccessResult result;
  int way = dl1_.lookup(block);
  if (way >= 0) {
    ++stats_.dl1_hits;
    result.hit = true;
    result.latency = config_.dl1_hit_latency;
    dl1_.touch(set, static_cast<unsigned>(way));
  } else {
    ++stats_.dl1_misses;
    const unsigned v = dl1_.victim(set);
    // A full, aligned block write overwrites every byte, so nothing is fetched.
    const bool full_block = kind == AccessKind::Write && bytes == l1_block_bytes_;
    const uint64_t done = refill_l1(dl1_, set, v, block, !full_block, now);
    dl1_busy_until_ = done;
    stats_.stall_cycles += done - now;
    result.latency = static_cast<unsigned>(done - now) + config_.dl1_hit_latency;
    way = static_cast<int>(v);
  }

  const auto w = static_cast<unsigned>(way);
  auto line_bytes = dl1_.data(set, w).subspan(offset, bytes);
  if (kind == AccessKind::Read) {
    std::copy(line_bytes.begin(), line_bytes.end(), data.begin());
    if (bytes <= 4) {
      uint32_t v = 0;
      std::memcpy(&v, data.data(), bytes);
      result.value = v;
    }
  } else {
    std::copy(data.begin(), data.end(), line_bytes.begin());
    dl1_.line(set, w).dirty = true;
  }
  return result;
}

AccessResult MemHierarchy::read(uint32_t addr, unsigned bytes, uint64_t now) {
  uint8_t buf[4] = {};
  return data_access(addr, AccessKind::Read, std::span<uint8_t>(buf, bytes), now);
}

AccessResult MemHierarchy::write(uint32_t addr, unsigned bytes, uint32_t value, uint64_t now) {
  uint8_t buf[4];
  std::memcpy(buf, &value, 4);
  return data_access(addr, AccessKind::Write, std::span<uint8_t>(buf, bytes), now);
}

FetchResult MemHierarchy::fetch_instr(uint32_t pc, uint64_t now) {
  check_access(pc, 4);
  const uint32_t block = pc / l1_block_bytes_;
  const unsigned set = il1_.set_of(block);
  FetchResult result;
  const auto& line = il1_.line(set, 0);
  if (line.valid && line.block == block) {
    ++stats_.il1_hits;
    result.hit = true;
  } else {
    ++stats_.il1_misses;
    auto& l = il1_.line(set, 0);
    l.dirty = false;  // IL1 is never written, so no writeback
    const uint64_t done = refill_l1(il1_, set, 0, block, true, now);
    result.stall = static_cast<unsigned>(done - now);
    stats_.stall_cycles += result.stall;
  }
  std::memcpy(&result.word, il1_.data(set, 0).data() + pc % l1_block_bytes_, 4);
  return result;
}

void MemHierarchy::flush_all() {
  for (unsigned s = 0; s < dl1_.sets(); ++s)
    for (unsigned w = 0; w < dl1_.ways(); ++w) {
      auto& line = dl1_.line(s, w);
      if (!line.valid || !line.dirty) continue;
      const uint32_t addr = line.block * l1_block_bytes_;
      const uint32_t lblock = addr / llc_block_bytes_;
      const int lw = llc_.lookup(lblock);
      auto src = dl1_.data(s, w);
      if (lw >= 0) {
        const unsigned ls = llc_.set_of(lblock);
        auto dst = llc_.data(ls, static_cast<unsigned>(lw)).subspan(addr % llc_block_bytes_, l1_block_bytes_);
        std::copy(src.begin(), src.end(), dst.begin());
        llc_.line(ls, static_cast<unsigned>(lw)).dirty = true;
      } else {
        auto dst = memory_.span(addr, l1_block_bytes_);
        std::copy(src.begin(), src.end(), dst.begin());
      }
      line.dirty = false;
    }
  for (unsigned s = 0; s < llc_.sets(); ++s)
    for (unsigned w = 0; w < llc_.ways(); ++w) {
      auto& line = llc_.line(s, w);
      if (!line.valid || !line.dirty) continue;
      auto src = llc_.data(s, w);
      auto dst = memory_.span(line.block * llc_block_bytes_, llc_block_bytes_);
      std::copy(src.begin(), src.end(), dst.begin());
      line.dirty = false;
    }
}

void MemHierarchy::peek(uint32_t addr, std::span<uint8_t> out) const {
  uint32_t done = 0;
  while (done < out.size()) {
    const uint32_t a = addr + done;
    const uint32_t block = a / l1_block_bytes_;
    const uint32_t off = a % l1_block_bytes_;
    const uint32_t n = std::min<uint32_t>(l1_block_bytes_ - off, static_cast<uint32_t>(out.size()) - done);
    auto dst = out.subspan(done, n);
    if (int w = dl1_.lookup(block); w >= 0) {
      auto src = dl1_.data(dl1_.set_of(block), static_cast<unsigned>(w)).subspan(off, n);
      std::copy(src.begin(), src.end(), dst.begin());
    } else if (int lw = llc_.lookup(a / llc_block_bytes_); lw >= 0) {
      const uint32_t lblock = a / llc_block_bytes_;
      auto src = llc_.data(llc_.set_of(lblock), static_cast<unsigned>(lw)).subspan(a % llc_block_bytes_, n);
      std::copy(src.begin(), src.end(), dst.begin());
    } else {
      auto src = memory_.span(a, n);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    done += n;
  }
}

}  // namespace vexsim
