#pragma once

// RV32IM plus the two vector-operand custom formats (I' and S').
//
// I' layout (custom-N major opcode):
//   31:29 vrd2 | 28:26 vrs2 | 25:23 vrd1 | 22:20 vrs1 | 19:15 rs1 | 14:12 funct3 | 11:7 rd | 6:0 opcode
// S' layout:
//   31 reserved(0) | 30:26 rs2 | 25:23 vrd1 | 22:20 vrs1 | 19:15 rs1 | 14:12 funct3 | 11:7 rd | 6:0 opcode
//
// The vector register names live in the span the base I-type uses for its
// 12-bit immediate, so rs1/funct3/rd/opcode keep their standard positions.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vexsim {

inline constexpr unsigned kNumVecRegs = 8;
inline constexpr unsigned kNumCustomSlots = 4;

/// Major opcodes of custom-0..custom-3.
inline constexpr std::array<uint32_t, kNumCustomSlots> kCustomOpcodes = {0x0b, 0x2b, 0x5b, 0x7b};

enum class Op : uint8_t {
  Lui, Auipc, Jal, Jalr,
  Beq, Bne, Blt, Bge, Bltu, Bgeu,
  Lb, Lh, Lw, Lbu, Lhu,
  Sb, Sh, Sw,
  Addi, Slti, Sltiu, Xori, Ori, Andi, Slli, Srli, Srai,
  Add, Sub, Sll, Slt, Sltu, Xor, Srl, Sra, Or, And,
  Fence, Ecall, Ebreak,
  Mul, Mulh, Mulhsu, Mulhu, Div, Divu, Rem, Remu,
  CustomI, CustomS,
};

enum class OpClass : uint8_t { Alu, Branch, Jump, Load, Store, MulDiv, System, Custom };

OpClass op_class(Op op);
std::string_view op_mnemonic(Op op);

enum class CustomType : uint8_t { IPrime, SPrime };

/// A decoded instruction. `op` is the tag; only the fields of that form are
/// meaningful and the rest stay zero, so defaulted equality is exact.
struct Instr {
  Op op = Op::Addi;
  uint8_t rd = 0;
  uint8_t rs1 = 0;
  uint8_t rs2 = 0;
  int32_t imm = 0;  // sign-extended; U-type holds the upper 20 bits, fence holds pred/succ
  uint8_t slot = 0;
  uint8_t funct3 = 0;
  uint8_t vrd1 = 0;
  uint8_t vrd2 = 0;
  uint8_t vrs1 = 0;
  uint8_t vrs2 = 0;

  bool operator==(const Instr&) const = default;

  bool is_custom() const { return op == Op::CustomI || op == Op::CustomS; }
};

struct CustomOpInfo {
  std::string mnemonic;
  CustomType type = CustomType::IPrime;
};

/// Which (slot, funct3) points of the custom opcode space are populated.
/// Decode rejects custom words whose point is empty.
class CustomIsa {
 public:
  /// Throws DuplicateSlot when the point is already taken.
  void add(unsigned slot, unsigned funct3, CustomType type, std::string mnemonic);

  const CustomOpInfo* find(unsigned slot, unsigned funct3) const;

  struct Match {
    unsigned slot;
    unsigned funct3;
    const CustomOpInfo* info;
  };
  std::optional<Match> find(std::string_view mnemonic) const;

  /// c0_lv, c0_sv, c1_merge, c2_sort, c3_psum, c3_psum_init.
  static const CustomIsa& builtin();

 private:
  std::array<std::optional<CustomOpInfo>, kNumCustomSlots * 8> ops_{};
};

class EncodeError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class DuplicateSlot : public std::logic_error {
  using std::logic_error::logic_error;
};

/// Returns nullopt for illegal words.
std::optional<Instr> decode(uint32_t word, const CustomIsa& isa = CustomIsa::builtin());

/// Throws EncodeError when a field is out of range.
uint32_t encode(const Instr& instr);

/// Text in the assembler's syntax.
std::string disassemble(const Instr& instr, const CustomIsa& isa = CustomIsa::builtin());

/// Convenience constructors used by tests and kernel generators.
Instr make_custom_i(unsigned slot, unsigned funct3, unsigned vrd1, unsigned vrd2, unsigned vrs1,
                    unsigned vrs2, unsigned rd = 0, unsigned rs1 = 0);
Instr make_custom_s(unsigned slot, unsigned funct3, unsigned vrd1, unsigned vrs1, unsigned rd,
                    unsigned rs1, unsigned rs2);

}  // namespace vexsim
