#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vexsim {

enum class TrapKind : uint8_t { IllegalInstruction, Misaligned, OutOfRange, Ebreak };

std::string_view trap_name(TrapKind kind);

/// Raised by memory and execution paths; the core turns it into a halting
/// StepResult.
class TrapError : public std::runtime_error {
 public:
  TrapError(TrapKind kind, uint32_t addr, const std::string& what)
      : std::runtime_error(what), kind_(kind), addr_(addr) {}

  TrapKind kind() const { return kind_; }
  uint32_t addr() const { return addr_; }

 private:
  TrapKind kind_;
  uint32_t addr_;
};

class ConfigError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace vexsim
