#pragma once

// Functional RV32IM interpreter and a random trap-free program generator.
// Both work straight from the bit layout of the base ISA and share no code
// with the simulator, so they can serve as its reference.

#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <vector>

namespace ref {

inline uint32_t bits(uint32_t w, unsigned hi, unsigned lo) { return (w >> lo) & ((1u << (hi - lo + 1)) - 1); }
inline int32_t sext(uint32_t v, unsigned width) {
  const unsigned s = 32 - width;
  return static_cast<int32_t>(v << s) >> s;
}

struct Machine {
  uint32_t x[32] = {};
  uint32_t pc = 0;
  uint32_t base = 0;
  std::vector<uint8_t> mem;
  bool halted = false;
  int32_t exit_code = 0;
  uint64_t retired = 0;

  Machine(uint32_t mem_base, uint32_t bytes) : base(mem_base), mem(bytes, 0) {}

  uint8_t* at(uint32_t addr, unsigned n) {
    if (addr < base || addr - base + n > mem.size()) throw std::out_of_range("ref: address out of range");
    if (addr % n) throw std::runtime_error("ref: misaligned");
    return mem.data() + (addr - base);
  }
  uint32_t load(uint32_t addr, unsigned n) {
    uint32_t v = 0;
    std::memcpy(&v, at(addr, n), n);
    return v;
  }
  void store(uint32_t addr, unsigned n, uint32_t v) { std::memcpy(at(addr, n), &v, n); }

  void set(unsigned r, uint32_t v) {
    if (r) x[r] = v;
  }

  void step() {
    const uint32_t w = load(pc, 4);
    const uint32_t rd = bits(w, 11, 7), rs1 = bits(w, 19, 15), rs2 = bits(w, 24, 20);
    const uint32_t f3 = bits(w, 14, 12), f7 = bits(w, 31, 25);
    const uint32_t a = x[rs1], b = x[rs2];
    const auto sa = static_cast<int32_t>(a), sb = static_cast<int32_t>(b);
    const int32_t ii = sext(bits(w, 31, 20), 12);
    uint32_t next = pc + 4;
    switch (bits(w, 6, 0)) {
      case 0x37: set(rd, w & 0xfffff000u); break;
      case 0x17: set(rd, pc + (w & 0xfffff000u)); break;
      case 0x6f: {
        const uint32_t v = (bits(w, 31, 31) << 20) | (bits(w, 19, 12) << 12) | (bits(w, 20, 20) << 11) |
                           (bits(w, 30, 21) << 1);
        set(rd, pc + 4);
        next = pc + sext(v, 21);
        break;
      }
      case 0x67:
        next = (a + ii) & ~1u;
        set(rd, pc + 4);
        break;
      case 0x63: {
        const uint32_t v = (bits(w, 31, 31) << 12) | (bits(w, 7, 7) << 11) | (bits(w, 30, 25) << 5) |
                           (bits(w, 11, 8) << 1);
        bool t = false;
        switch (f3) {
          case 0: t = a == b; break;
          case 1: t = a != b; break;
          case 4: t = sa < sb; break;
          case 5: t = sa >= sb; break;
          case 6: t = a < b; break;
          case 7: t = a >= b; break;
          default: throw std::runtime_error("ref: bad branch");
        }
        if (t) next = pc + sext(v, 13);
        break;
      }
      case 0x03: {
        const uint32_t addr = a + ii;
        switch (f3) {
          case 0: set(rd, sext(load(addr, 1), 8)); break;
          case 1: set(rd, sext(load(addr, 2), 16)); break;
          case 2: set(rd, load(addr, 4)); break;
          case 4: set(rd, load(addr, 1)); break;
          case 5: set(rd, load(addr, 2)); break;
          default: throw std::runtime_error("ref: bad load");
        }
        break;
      }
      case 0x23: {
        const uint32_t addr = a + sext((bits(w, 31, 25) << 5) | bits(w, 11, 7), 12);
        const unsigned n = f3 == 0 ? 1 : f3 == 1 ? 2 : 4;
        store(addr, n, b);
        break;
      }
      case 0x13: {
        const uint32_t sh = rs2;
        switch (f3) {
          case 0: set(rd, a + ii); break;
          case 1: set(rd, a << sh); break;
          case 2: set(rd, sa < ii); break;
          case 3: set(rd, a < static_cast<uint32_t>(ii)); break;
          case 4: set(rd, a ^ ii); break;
          case 5: set(rd, f7 ? static_cast<uint32_t>(sa >> sh) : a >> sh); break;
          case 6: set(rd, a | ii); break;
          case 7: set(rd, a & ii); break;
        }
        break;
      }
      case 0x33:
        if (f7 == 1) {
          switch (f3) {
            case 0: set(rd, a * b); break;
            case 1: set(rd, static_cast<uint32_t>((int64_t{sa} * sb) >> 32)); break;
            case 2: set(rd, static_cast<uint32_t>((int64_t{sa} * int64_t{b}) >> 32)); break;
            case 3: set(rd, static_cast<uint32_t>((uint64_t{a} * b) >> 32)); break;
            case 4: set(rd, b == 0 ? ~0u : (sa == INT32_MIN && sb == -1) ? a : static_cast<uint32_t>(sa / sb)); break;
            case 5: set(rd, b == 0 ? ~0u : a / b); break;
            case 6: set(rd, b == 0 ? a : (sa == INT32_MIN && sb == -1) ? 0 : static_cast<uint32_t>(sa % sb)); break;
            case 7: set(rd, b == 0 ? a : a % b); break;
          }
        } else {
          switch (f3) {
            case 0: set(rd, f7 ? a - b : a + b); break;
            case 1: set(rd, a << (b & 31)); break;
            case 2: set(rd, sa < sb); break;
            case 3: set(rd, a < b); break;
            case 4: set(rd, a ^ b); break;
            case 5: set(rd, f7 ? static_cast<uint32_t>(sa >> (b & 31)) : a >> (b & 31)); break;
            case 6: set(rd, a | b); break;
            case 7: set(rd, a & b); break;
          }
        }
        break;
      case 0x0f: break;
      case 0x73:
        if (w == 0x00000073 && x[17] == 93) {
          halted = true;
          exit_code = static_cast<int32_t>(x[10]);
        } else {
          throw std::runtime_error("ref: unsupported system instruction");
        }
        break;
      default: throw std::runtime_error("ref: illegal instruction");
    }
    ++retired;
    pc = next;
  }

  void run(uint64_t max_steps) {
    for (uint64_t i = 0; i < max_steps && !halted; ++i) step();
  }
};

// Raw encoders.
inline uint32_t r_type(uint32_t f7, uint32_t rs2, uint32_t rs1, uint32_t f3, uint32_t rd, uint32_t op) {
  return f7 << 25 | rs2 << 20 | rs1 << 15 | f3 << 12 | rd << 7 | op;
}
inline uint32_t i_type(int32_t imm, uint32_t rs1, uint32_t f3, uint32_t rd, uint32_t op) {
  return (static_cast<uint32_t>(imm) & 0xfff) << 20 | rs1 << 15 | f3 << 12 | rd << 7 | op;
}
inline uint32_t s_type(int32_t imm, uint32_t rs2, uint32_t rs1, uint32_t f3) {
  const auto u = static_cast<uint32_t>(imm) & 0xfff;
  return (u >> 5) << 25 | rs2 << 20 | rs1 << 15 | f3 << 12 | (u & 31) << 7 | 0x23;
}
inline uint32_t b_type(int32_t imm, uint32_t rs2, uint32_t rs1, uint32_t f3) {
  const auto u = static_cast<uint32_t>(imm);
  return bits(u, 12, 12) << 31 | bits(u, 10, 5) << 25 | rs2 << 20 | rs1 << 15 | f3 << 12 |
         bits(u, 4, 1) << 8 | bits(u, 11, 11) << 7 | 0x63;
}
inline uint32_t j_type(int32_t imm, uint32_t rd) {
  const auto u = static_cast<uint32_t>(imm);
  return bits(u, 20, 20) << 31 | bits(u, 10, 1) << 21 | bits(u, 11, 11) << 20 | bits(u, 19, 12) << 12 |
         rd << 7 | 0x6f;
}
inline uint32_t u_type(uint32_t imm20, uint32_t rd, uint32_t op) { return imm20 << 12 | rd << 7 | op; }

/// Straight-line RV32IM code with forward branches and jumps, loads and
/// stores confined to a data window addressed through x31, ending in an exit
/// host call. Never traps.
struct Program {
  std::vector<uint32_t> words;
  uint32_t data_base = 0;
  uint32_t data_bytes = 0;
};

inline Program random_program(uint64_t seed, std::size_t n, uint32_t data_base = 0x10000,
                              uint32_t data_bytes = 4096) {
  std::mt19937_64 rng(seed);
  auto pick = [&](uint32_t lo, uint32_t hi) { return std::uniform_int_distribution<uint32_t>(lo, hi)(rng); };
  auto reg = [&] { return pick(0, 30); };  // x31 holds the data base
  auto dst = [&] { return pick(1, 30); };

  Program p{{}, data_base, data_bytes};
  auto& w = p.words;
  w.push_back(u_type(data_base >> 12, 31, 0x37));
  w.push_back(i_type(static_cast<int32_t>(data_base & 0xfff), 31, 0, 31, 0x13));
  for (unsigned r = 1; r < 31; ++r) {
    w.push_back(u_type(pick(0, 0xfffff), r, 0x37));
    w.push_back(i_type(static_cast<int32_t>(pick(0, 0xfff)) - 2048, r, 0, r, 0x13));
  }

  const std::size_t body_end = n > w.size() + 2 ? n - 2 : w.size();
  struct Jump {
    std::size_t at;
    uint32_t words;
    bool branch;
  };
  std::vector<Jump> jumps;
  std::vector<bool> is_jalr;
  while (w.size() < body_end) {
    const std::size_t left = body_end - w.size();
    const uint32_t kind = pick(0, 99);
    if (kind < 30) {
      static constexpr uint32_t f7s[] = {0, 0x20};
      const uint32_t f3 = pick(0, 7);
      const uint32_t f7 = (f3 == 0 || f3 == 5) ? f7s[pick(0, 1)] : 0;
      w.push_back(r_type(f7, reg(), reg(), f3, dst(), 0x33));
    } else if (kind < 40) {
      w.push_back(r_type(1, reg(), reg(), pick(0, 7), dst(), 0x33));
    } else if (kind < 60) {
      const uint32_t f3 = pick(0, 7);
      if (f3 == 1 || f3 == 5) {
        const uint32_t f7 = f3 == 5 && pick(0, 1) ? 0x20 : 0;
        w.push_back(r_type(f7, pick(0, 31), reg(), f3, dst(), 0x13));
      } else {
        w.push_back(i_type(static_cast<int32_t>(pick(0, 4095)) - 2048, reg(), f3, dst(), 0x13));
      }
    } else if (kind < 65) {
      w.push_back(u_type(pick(0, 0xfffff), dst(), pick(0, 1) ? 0x37 : 0x17));
    } else if (kind < 75) {
      static constexpr uint32_t f3s[] = {0, 1, 2, 4, 5};
      const uint32_t f3 = f3s[pick(0, 4)];
      const uint32_t n_bytes = f3 == 2 ? 4 : (f3 == 1 || f3 == 5) ? 2 : 1;
      const int32_t off = static_cast<int32_t>(pick(0, (data_bytes - 4) / n_bytes) * n_bytes);
      if (off > 2047) continue;
      w.push_back(i_type(off, 31, f3, dst(), 0x03));
    } else if (kind < 85) {
      const uint32_t f3 = pick(0, 2);
      const uint32_t n_bytes = 1u << f3;
      const int32_t off = static_cast<int32_t>(pick(0, (data_bytes - 4) / n_bytes) * n_bytes);
      if (off > 2047) continue;
      w.push_back(s_type(off, reg(), 31, f3));
    } else if (kind < 95) {
      if (left < 10) continue;
      static constexpr uint32_t f3s[] = {0, 1, 4, 5, 6, 7};
      jumps.push_back({w.size(), pick(1, 8), true});
      w.push_back(b_type(0, reg(), reg(), f3s[pick(0, 5)]));
    } else if (kind < 98) {
      if (left < 10) continue;
      jumps.push_back({w.size(), pick(1, 8), false});
      w.push_back(j_type(0, pick(0, 30)));
    } else {
      if (left < 10) continue;
      // auipc t; jalr rd, t, 12 skips the following word.
      const uint32_t t = dst();
      w.push_back(u_type(0, t, 0x17));
      is_jalr.resize(w.size() + 1);
      is_jalr[w.size()] = true;
      w.push_back(i_type(12, t, 0, pick(0, 30), 0x67));
      w.push_back(r_type(0, reg(), reg(), 0, dst(), 0x33));
    }
  }
  // Landing on a jalr would skip its auipc, so step over it.
  is_jalr.resize(w.size());
  for (const Jump& j : jumps) {
    uint32_t k = j.words;
    if (is_jalr[j.at + k]) ++k;
    const auto off = static_cast<int32_t>(k * 4);
    w[j.at] |= j.branch ? b_type(off, 0, 0, 0) & ~0x7fu : j_type(off, 0) & ~0x7fu;
  }
  w.push_back(i_type(93, 0, 0, 17, 0x13));
  w.push_back(0x00000073);
  return p;
}

}  // namespace ref
