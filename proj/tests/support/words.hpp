#pragma once

#include <cstdint>
#include <random>

#include "vexsim/isa.hpp"

namespace testsupport {

/// A uniformly drawn word under one of the legal major opcodes that the
/// built-in decoder accepts. S' words keep their reserved bit clear.
inline uint32_t random_valid_word(std::mt19937_64& rng, const vexsim::CustomIsa& isa = vexsim::CustomIsa::builtin()) {
  static constexpr uint32_t kOpcodes[] = {0x37, 0x17, 0x6f, 0x67, 0x63, 0x03, 0x23, 0x13,
                                          0x33, 0x0f, 0x73, 0x0b, 0x2b, 0x5b, 0x7b};
  std::uniform_int_distribution<std::size_t> op_pick(0, std::size(kOpcodes) - 1);
  while (true) {
    const uint32_t opcode = kOpcodes[op_pick(rng)];
    uint32_t w = (static_cast<uint32_t>(rng()) & ~0x7fu) | opcode;
    if (opcode == 0x73) w = rng() & 1 ? 0x00000073 : 0x00100073;
    if (opcode == 0x0f) w &= 0x0ff0007f;
    if (opcode == 0x33 && (rng() & 3) != 0) {
      // Most random funct7 values are illegal; bias towards the defined ones.
      static constexpr uint32_t f7[] = {0x00, 0x20, 0x01};
      w = (w & 0x01ffffff) | f7[rng() % 3] << 25;
    }
    if (opcode == 0x13 && (rng() & 1)) w &= 0xbfffffff;
    const auto d = vexsim::decode(w, isa);
    if (!d) continue;
    if (d->op == vexsim::Op::CustomS) w &= 0x7fffffff;
    return w;
  }
}

}  // namespace testsupport
