#pragma once

#include <memory>
#include <string_view>

#include "vexsim/assembler.hpp"
#include "vexsim/core.hpp"

namespace testsupport {

inline std::unique_ptr<vexsim::Core> load(std::string_view src, vexsim::SimConfig cfg = {}) {
  auto core = std::make_unique<vexsim::Core>(cfg);
  core->load_image(vexsim::assemble(src));
  return core;
}

inline std::unique_ptr<vexsim::Core> run(std::string_view src, vexsim::SimConfig cfg = {},
                                         uint64_t max_cycles = 10'000'000) {
  auto core = load(src, cfg);
  core->run(max_cycles);
  return core;
}

inline vexsim::SimConfig traced() {
  vexsim::SimConfig c;
  c.trace = true;
  return c;
}

}  // namespace testsupport
