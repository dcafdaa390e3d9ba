#pragma once

// Two-pass assembler for RV32IM and the custom vector mnemonics.
//
// Custom syntax (destinations first, base registers last; trailing operands
// may be omitted and default to v0/x0):
//   I':  mnemonic vrd1, vrd2, vrs1, vrs2, rd, rs1
//   S':  mnemonic vrd1, vrs1, rd, rs1, rs2
//
// Directives: .text .data .org .align .space .word .half .byte .globl
// Pseudo-ops: nop li la mv not neg j jr ret call beqz bnez bltz bgez blez
//             bgtz bgt ble bgtu bleu seqz snez
// A numeric branch/jump target is a pc-relative offset; a symbol is an address.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vexsim/image.hpp"
#include "vexsim/isa.hpp"

namespace vexsim {

enum class AsmErrorKind : uint8_t {
  UnknownMnemonic,
  UndefinedLabel,
  OperandArity,
  RangeError,
  Syntax,
  DuplicateLabel,
};

std::string_view asm_error_name(AsmErrorKind kind);

class AsmError : public std::runtime_error {
 public:
  AsmError(AsmErrorKind kind, unsigned line, const std::string& msg);

  AsmErrorKind kind() const { return kind_; }
  unsigned line() const { return line_; }

 private:
  AsmErrorKind kind_;
  unsigned line_;
};

struct AsmOptions {
  uint32_t base = 0;
  /// The data section starts at the first multiple of this after the text,
  /// unless it is placed with .org.
  uint32_t data_align = 256;
};

Image assemble(std::string_view source, const CustomIsa& isa = CustomIsa::builtin(),
               const AsmOptions& options = {});

/// "0xADDRESS: WORD  disassembly" per 32-bit word; undecodable words render as
/// ".word", so every line reassembles to the word it lists.
std::string link_and_dump(const Image& image, const CustomIsa& isa = CustomIsa::builtin());

}  // namespace vexsim
