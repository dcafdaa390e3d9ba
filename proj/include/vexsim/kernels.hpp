#pragma once

// Assembly sources of the bundled benchmarks.
//
// All kernels take their arguments in a0..a4, bracket the measured region with
// cycle-counter host calls (start in s10/s11, end in t5/t6) and exit with 0.

#include <string>
#include <string_view>

namespace vexsim {

/// Throws std::invalid_argument for an unknown name.
std::string kernel_source(std::string_view bench, unsigned vlen_bits);

}  // namespace vexsim
