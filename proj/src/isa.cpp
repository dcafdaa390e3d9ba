#include "vexsim/isa.hpp"

#include <cstdio>

namespace vexsim {

namespace {

constexpr uint32_t kOpLui = 0x37;
constexpr uint32_t kOpAuipc = 0x17;
constexpr uint32_t kOpJal = 0x6f;
constexpr uint32_t kOpJalr = 0x67;
constexpr uint32_t kOpBranch = 0x63;
constexpr uint32_t kOpLoad = 0x03;
constexpr uint32_t kOpStore = 0x23;
constexpr uint32_t kOpImm = 0x13;
constexpr uint32_t kOpReg = 0x33;
constexpr uint32_t kOpMiscMem = 0x0f;
constexpr uint32_t kOpSystem = 0x73;

struct OpInfo {
  Op op;
  std::string_view name;
  OpClass cls;
};

// Indexed by Op.
constexpr OpInfo kOps[] = {
    {Op::Lui, "lui", OpClass::Alu},       {Op::Auipc, "auipc", OpClass::Alu},
    {Op::Jal, "jal", OpClass::Jump},      {Op::Jalr, "jalr", OpClass::Jump},
    {Op::Beq, "beq", OpClass::Branch},    {Op::Bne, "bne", OpClass::Branch},
    {Op::Blt, "blt", OpClass::Branch},    {Op::Bge, "bge", OpClass::Branch},
    {Op::Bltu, "bltu", OpClass::Branch},  {Op::Bgeu, "bgeu", OpClass::Branch},
    {Op::Lb, "lb", OpClass::Load},        {Op::Lh, "lh", OpClass::Load},
    {Op::Lw, "lw", OpClass::Load},        {Op::Lbu, "lbu", OpClass::Load},
    {Op::Lhu, "lhu", OpClass::Load},      {Op::Sb, "sb", OpClass::Store},
    {Op::Sh, "sh", OpClass::Store},       {Op::Sw, "sw", OpClass::Store},
    {Op::Addi, "addi", OpClass::Alu},     {Op::Slti, "slti", OpClass::Alu},
    {Op::Sltiu, "sltiu", OpClass::Alu},   {Op::Xori, "xori", OpClass::Alu},
    {Op::Ori, "ori", OpClass::Alu},       {Op::Andi, "andi", OpClass::Alu},
    {Op::Slli, "slli", OpClass::Alu},     {Op::Srli, "srli", OpClass::Alu},
    {Op::Srai, "srai", OpClass::Alu},     {Op::Add, "add", OpClass::Alu},
    {Op::Sub, "sub", OpClass::Alu},       {Op::Sll, "sll", OpClass::Alu},
    {Op::Slt, "slt", OpClass::Alu},       {Op::Sltu, "sltu", OpClass::Alu},
    {Op::Xor, "xor", OpClass::Alu},       {Op::Srl, "srl", OpClass::Alu},
    {Op::Sra, "sra", OpClass::Alu},       {Op::Or, "or", OpClass::Alu},
    {Op::And, "and", OpClass::Alu},       {Op::Fence, "fence", OpClass::System},
    {Op::Ecall, "ecall", OpClass::System}, {Op::Ebreak, "ebreak", OpClass::System},
    {Op::Mul, "mul", OpClass::MulDiv},    {Op::Mulh, "mulh", OpClass::MulDiv},
    {Op::Mulhsu, "mulhsu", OpClass::MulDiv}, {Op::Mulhu, "mulhu", OpClass::MulDiv},
    {Op::Div, "div", OpClass::MulDiv},    {Op::Divu, "divu", OpClass::MulDiv},
    {Op::Rem, "rem", OpClass::MulDiv},    {Op::Remu, "remu", OpClass::MulDiv},
    {Op::CustomI, "custom.i", OpClass::Custom}, {Op::CustomS, "custom.s", OpClass::Custom},
};
static_assert(std::size(kOps) == static_cast<size_t>(Op::CustomS) + 1);

// funct3 / funct7 for each register-register op.
struct RFields {
  Op op;
  uint32_t funct3;
  uint32_t funct7;
};
constexpr RFields kRegOps[] = {
    {Op::Add, 0, 0x00},  {Op::Sub, 0, 0x20},  {Op::Sll, 1, 0x00},    {Op::Slt, 2, 0x00},
    {Op::Sltu, 3, 0x00}, {Op::Xor, 4, 0x00},  {Op::Srl, 5, 0x00},    {Op::Sra, 5, 0x20},
    {Op::Or, 6, 0x00},   {Op::And, 7, 0x00},  {Op::Mul, 0, 0x01},    {Op::Mulh, 1, 0x01},
    {Op::Mulhsu, 2, 0x01}, {Op::Mulhu, 3, 0x01}, {Op::Div, 4, 0x01}, {Op::Divu, 5, 0x01},
    {Op::Rem, 6, 0x01},  {Op::Remu, 7, 0x01},
};

constexpr Op kBranchByF3[8] = {Op::Beq, Op::Bne, Op::Ebreak, Op::Ebreak,
                               Op::Blt, Op::Bge, Op::Bltu,   Op::Bgeu};
constexpr Op kLoadByF3[8] = {Op::Lb, Op::Lh, Op::Lw, Op::Ebreak, Op::Lbu, Op::Lhu, Op::Ebreak, Op::Ebreak};
constexpr Op kStoreByF3[8] = {Op::Sb, Op::Sh, Op::Sw, Op::Ebreak, Op::Ebreak, Op::Ebreak, Op::Ebreak, Op::Ebreak};
constexpr Op kImmByF3[8] = {Op::Addi, Op::Slli, Op::Slti, Op::Sltiu, Op::Xori, Op::Srli, Op::Ori, Op::Andi};

uint32_t f3_of(Op op, const Op (&table)[8]) {
  for (uint32_t i = 0; i < 8; ++i)
    if (table[i] == op) return i;
  return 0;
}

constexpr uint32_t bits(uint32_t w, unsigned hi, unsigned lo) {
  return (w >> lo) & ((1u << (hi - lo + 1)) - 1);
}

constexpr int32_t sext(uint32_t v, unsigned width) {
  const uint32_t m = 1u << (width - 1);
  return static_cast<int32_t>((v ^ m) - m);
}

int32_t imm_i(uint32_t w) { return sext(bits(w, 31, 20), 12); }
int32_t imm_s(uint32_t w) { return sext((bits(w, 31, 25) << 5) | bits(w, 11, 7), 12); }
int32_t imm_b(uint32_t w) {
  uint32_t v = (bits(w, 31, 31) << 12) | (bits(w, 7, 7) << 11) | (bits(w, 30, 25) << 5) |
               (bits(w, 11, 8) << 1);
  return sext(v, 13);
}
int32_t imm_j(uint32_t w) {
  uint32_t v = (bits(w, 31, 31) << 20) | (bits(w, 19, 12) << 12) | (bits(w, 20, 20) << 11) |
               (bits(w, 30, 21) << 1);
  return sext(v, 21);
}

int custom_slot_of(uint32_t opcode) {
  for (unsigned s = 0; s < kNumCustomSlots; ++s)
    if (kCustomOpcodes[s] == opcode) return static_cast<int>(s);
  return -1;
}

void check_reg(unsigned r, unsigned limit, const char* what) {
  if (r >= limit) throw EncodeError(std::string("register out of range: ") + what);
}

void check_range(int32_t v, int32_t lo, int32_t hi, const char* what) {
  if (v < lo || v > hi) throw EncodeError(std::string("immediate out of range: ") + what);
}

std::string xr(unsigned r) { return "x" + std::to_string(r); }
std::string vr(unsigned r) { return "v" + std::to_string(r); }

std::string fence_set(unsigned bits4) {
  if (bits4 == 0) return "0";
  std::string s;
  if (bits4 & 8) s += 'i';
  if (bits4 & 4) s += 'o';
  if (bits4 & 2) s += 'r';
  if (bits4 & 1) s += 'w';
  return s;
}

}  // namespace

OpClass op_class(Op op) { return kOps[static_cast<size_t>(op)].cls; }
std::string_view op_mnemonic(Op op) { return kOps[static_cast<size_t>(op)].name; }

void CustomIsa::add(unsigned slot, unsigned funct3, CustomType type, std::string mnemonic) {
  if (slot >= kNumCustomSlots || funct3 >= 8) throw EncodeError("custom slot/funct3 out of range");
  auto& entry = ops_[slot * 8 + funct3];
  if (entry)
    throw DuplicateSlot("custom-" + std::to_string(slot) + " funct3 " + std::to_string(funct3) +
                        " already holds " + entry->mnemonic);
  entry = CustomOpInfo{std::move(mnemonic), type};
}

const CustomOpInfo* CustomIsa::find(unsigned slot, unsigned funct3) const {
  if (slot >= kNumCustomSlots || funct3 >= 8) return nullptr;
  const auto& entry = ops_[slot * 8 + funct3];
  return entry ? &*entry : nullptr;
}

std::optional<CustomIsa::Match> CustomIsa::find(std::string_view mnemonic) const {
  for (unsigned i = 0; i < ops_.size(); ++i)
    if (ops_[i] && ops_[i]->mnemonic == mnemonic) return Match{i / 8, i % 8, &*ops_[i]};
  return std::nullopt;
}

const CustomIsa& CustomIsa::builtin() {
  static const CustomIsa isa = [] {
    CustomIsa t;
    t.add(0, 0, CustomType::SPrime, "c0_lv");
    t.add(0, 1, CustomType::SPrime, "c0_sv");
    t.add(1, 0, CustomType::IPrime, "c1_merge");
    t.add(2, 0, CustomType::IPrime, "c2_sort");
    t.add(3, 0, CustomType::IPrime, "c3_psum");
    t.add(3, 1, CustomType::IPrime, "c3_psum_init");
    return t;
  }();
  return isa;
}

std::optional<Instr> decode(uint32_t w, const CustomIsa& isa) {
  if ((w & 3) != 3) return std::nullopt;
  const uint32_t opcode = w & 0x7f;
  const uint32_t f3 = bits(w, 14, 12);
  const uint32_t f7 = bits(w, 31, 25);
  Instr in;
  const uint8_t rd = bits(w, 11, 7), rs1 = bits(w, 19, 15), rs2 = bits(w, 24, 20);

  switch (opcode) {
    case kOpLui:
    case kOpAuipc:
      in.op = opcode == kOpLui ? Op::Lui : Op::Auipc;
      in.rd = rd;
      in.imm = static_cast<int32_t>(w >> 12);
      return in;
    case kOpJal:
      in.op = Op::Jal;
      in.rd = rd;
      in.imm = imm_j(w);
      return in;
    case kOpJalr:
      if (f3 != 0) return std::nullopt;
      in.op = Op::Jalr;
      in.rd = rd;
      in.rs1 = rs1;
      in.imm = imm_i(w);
      return in;
    case kOpBranch:
      if (f3 == 2 || f3 == 3) return std::nullopt;
      in.op = kBranchByF3[f3];
      in.rs1 = rs1;
      in.rs2 = rs2;
      in.imm = imm_b(w);
      return in;
    case kOpLoad:
      if (kLoadByF3[f3] == Op::Ebreak) return std::nullopt;
      in.op = kLoadByF3[f3];
      in.rd = rd;
      in.rs1 = rs1;
      in.imm = imm_i(w);
      return in;
    case kOpStore:
      if (kStoreByF3[f3] == Op::Ebreak) return std::nullopt;
      in.op = kStoreByF3[f3];
      in.rs1 = rs1;
      in.rs2 = rs2;
      in.imm = imm_s(w);
      return in;
    case kOpImm:
      in.op = kImmByF3[f3];
      in.rd = rd;
      in.rs1 = rs1;
      if (f3 == 1 || f3 == 5) {
        if (f3 == 1 && f7 != 0) return std::nullopt;
        if (f3 == 5) {
          if (f7 == 0x20) in.op = Op::Srai;
          else if (f7 != 0) return std::nullopt;
        }
        in.imm = static_cast<int32_t>(rs2);
      } else {
        in.imm = imm_i(w);
      }
      return in;
    case kOpReg:
      for (const auto& r : kRegOps)
        if (r.funct3 == f3 && r.funct7 == f7) {
          in.op = r.op;
          in.rd = rd;
          in.rs1 = rs1;
          in.rs2 = rs2;
          return in;
        }
      return std::nullopt;
    case kOpMiscMem:
      if (f3 != 0 || rd != 0 || rs1 != 0 || bits(w, 31, 28) != 0) return std::nullopt;
      in.op = Op::Fence;
      in.imm = static_cast<int32_t>(bits(w, 27, 20));
      return in;
    case kOpSystem:
      if (w == 0x00000073) {
        in.op = Op::Ecall;
        return in;
      }
      if (w == 0x00100073) {
        in.op = Op::Ebreak;
        return in;
      }
      return std::nullopt;
    default:
      break;
  }

  const int slot = custom_slot_of(opcode);
  if (slot < 0) return std::nullopt;
  const CustomOpInfo* info = isa.find(static_cast<unsigned>(slot), f3);
  if (!info) return std::nullopt;
  in.slot = static_cast<uint8_t>(slot);
  in.funct3 = static_cast<uint8_t>(f3);
  in.rd = rd;
  in.rs1 = rs1;
  in.vrd1 = bits(w, 25, 23);
  in.vrs1 = bits(w, 22, 20);
  if (info->type == CustomType::IPrime) {
    in.op = Op::CustomI;
    in.vrd2 = bits(w, 31, 29);
    in.vrs2 = bits(w, 28, 26);
  } else {
    // bit 31 is reserved and ignored here.
    in.op = Op::CustomS;
    in.rs2 = bits(w, 30, 26);
  }
  return in;
}

uint32_t encode(const Instr& in) {
  check_reg(in.rd, 32, "rd");
  check_reg(in.rs1, 32, "rs1");
  check_reg(in.rs2, 32, "rs2");
  const uint32_t rd = uint32_t{in.rd} << 7;
  const uint32_t rs1 = uint32_t{in.rs1} << 15;
  const uint32_t rs2 = uint32_t{in.rs2} << 20;
  const auto imm = static_cast<uint32_t>(in.imm);

  auto i_type = [&](uint32_t opcode, uint32_t f3) {
    check_range(in.imm, -2048, 2047, "I-type");
    return ((imm & 0xfff) << 20) | rs1 | (f3 << 12) | rd | opcode;
  };

  switch (in.op) {
    case Op::Lui:
    case Op::Auipc:
      check_range(in.imm, 0, 0xfffff, "U-type");
      return (imm << 12) | rd | (in.op == Op::Lui ? kOpLui : kOpAuipc);
    case Op::Jal:
      check_range(in.imm, -(1 << 20), (1 << 20) - 2, "J-type");
      if (in.imm & 1) throw EncodeError("jump offset must be even");
      return (bits(imm, 20, 20) << 31) | (bits(imm, 10, 1) << 21) | (bits(imm, 11, 11) << 20) |
             (bits(imm, 19, 12) << 12) | rd | kOpJal;
    case Op::Jalr:
      return i_type(kOpJalr, 0);
    case Op::Beq: case Op::Bne: case Op::Blt: case Op::Bge: case Op::Bltu: case Op::Bgeu:
      check_range(in.imm, -4096, 4094, "B-type");
      if (in.imm & 1) throw EncodeError("branch offset must be even");
      return (bits(imm, 12, 12) << 31) | (bits(imm, 10, 5) << 25) | rs2 | rs1 |
             (f3_of(in.op, kBranchByF3) << 12) | (bits(imm, 4, 1) << 8) |
             (bits(imm, 11, 11) << 7) | kOpBranch;
    case Op::Lb: case Op::Lh: case Op::Lw: case Op::Lbu: case Op::Lhu:
      return i_type(kOpLoad, f3_of(in.op, kLoadByF3));
    case Op::Sb: case Op::Sh: case Op::Sw:
      check_range(in.imm, -2048, 2047, "S-type");
      return (bits(imm, 11, 5) << 25) | rs2 | rs1 | (f3_of(in.op, kStoreByF3) << 12) |
             (bits(imm, 4, 0) << 7) | kOpStore;
    case Op::Addi: case Op::Slti: case Op::Sltiu: case Op::Xori: case Op::Ori: case Op::Andi:
      return i_type(kOpImm, f3_of(in.op, kImmByF3));
    case Op::Slli: case Op::Srli: case Op::Srai: {
      check_range(in.imm, 0, 31, "shamt");
      const uint32_t f7 = in.op == Op::Srai ? 0x20 : 0;
      const uint32_t f3 = in.op == Op::Slli ? 1 : 5;
      return (f7 << 25) | (imm << 20) | rs1 | (f3 << 12) | rd | kOpImm;
    }
    case Op::Fence:
      check_range(in.imm, 0, 0xff, "fence");
      return (imm << 20) | kOpMiscMem;
    case Op::Ecall:
      return 0x00000073;
    case Op::Ebreak:
      return 0x00100073;
    case Op::CustomI:
    case Op::CustomS: {
      if (in.slot >= kNumCustomSlots) throw EncodeError("custom slot out of range");
      if (in.funct3 >= 8) throw EncodeError("funct3 out of range");
      check_reg(in.vrd1, kNumVecRegs, "vrd1");
      check_reg(in.vrs1, kNumVecRegs, "vrs1");
      uint32_t w = kCustomOpcodes[in.slot] | rd | (uint32_t{in.funct3} << 12) | rs1 |
                   (uint32_t{in.vrs1} << 20) | (uint32_t{in.vrd1} << 23);
      if (in.op == Op::CustomI) {
        check_reg(in.vrd2, kNumVecRegs, "vrd2");
        check_reg(in.vrs2, kNumVecRegs, "vrs2");
        w |= (uint32_t{in.vrs2} << 26) | (uint32_t{in.vrd2} << 29);
      } else {
        w |= uint32_t{in.rs2} << 26;
      }
      return w;
    }
    default:
      for (const auto& r : kRegOps)
        if (r.op == in.op) return (r.funct7 << 25) | rs2 | rs1 | (r.funct3 << 12) | rd | kOpReg;
      break;
  }
  throw EncodeError("unknown op");
}

std::string disassemble(const Instr& in, const CustomIsa& isa) {
  const std::string name(op_mnemonic(in.op));
  const std::string imm = std::to_string(in.imm);
  switch (op_class(in.op)) {
    case OpClass::Load:
      return name + " " + xr(in.rd) + ", " + imm + "(" + xr(in.rs1) + ")";
    case OpClass::Store:
      return name + " " + xr(in.rs2) + ", " + imm + "(" + xr(in.rs1) + ")";
    case OpClass::Branch:
      return name + " " + xr(in.rs1) + ", " + xr(in.rs2) + ", " + imm;
    case OpClass::Custom: {
      const CustomOpInfo* info = isa.find(in.slot, in.funct3);
      if (!info) {
        char buf[32];
        std::snprintf(buf, sizeof buf, ".word 0x%08x", encode(in));
        return buf;
      }
      if (in.op == Op::CustomI)
        return info->mnemonic + " " + vr(in.vrd1) + ", " + vr(in.vrd2) + ", " + vr(in.vrs1) +
               ", " + vr(in.vrs2) + ", " + xr(in.rd) + ", " + xr(in.rs1);
      return info->mnemonic + " " + vr(in.vrd1) + ", " + vr(in.vrs1) + ", " + xr(in.rd) + ", " +
             xr(in.rs1) + ", " + xr(in.rs2);
    }
    default:
      break;
  }
  switch (in.op) {
    case Op::Lui:
    case Op::Auipc: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%s x%u, 0x%x", name.c_str(), unsigned{in.rd},
                    static_cast<unsigned>(in.imm));
      return buf;
    }
    case Op::Jal:
      return name + " " + xr(in.rd) + ", " + imm;
    case Op::Jalr:
      return name + " " + xr(in.rd) + ", " + imm + "(" + xr(in.rs1) + ")";
    case Op::Addi: case Op::Slti: case Op::Sltiu: case Op::Xori: case Op::Ori: case Op::Andi:
    case Op::Slli: case Op::Srli: case Op::Srai:
      return name + " " + xr(in.rd) + ", " + xr(in.rs1) + ", " + imm;
    case Op::Fence:
      return name + " " + fence_set(static_cast<unsigned>(in.imm) >> 4) + ", " +
             fence_set(static_cast<unsigned>(in.imm) & 0xf);
    case Op::Ecall:
    case Op::Ebreak:
      return name;
    default:
      return name + " " + xr(in.rd) + ", " + xr(in.rs1) + ", " + xr(in.rs2);
  }
}

Instr make_custom_i(unsigned slot, unsigned funct3, unsigned vrd1, unsigned vrd2, unsigned vrs1,
                    unsigned vrs2, unsigned rd, unsigned rs1) {
  Instr in;
  in.op = Op::CustomI;
  in.slot = static_cast<uint8_t>(slot);
  in.funct3 = static_cast<uint8_t>(funct3);
  in.vrd1 = static_cast<uint8_t>(vrd1);
  in.vrd2 = static_cast<uint8_t>(vrd2);
  in.vrs1 = static_cast<uint8_t>(vrs1);
  in.vrs2 = static_cast<uint8_t>(vrs2);
  in.rd = static_cast<uint8_t>(rd);
  in.rs1 = static_cast<uint8_t>(rs1);
  return in;
}

Instr make_custom_s(unsigned slot, unsigned funct3, unsigned vrd1, unsigned vrs1, unsigned rd,
                    unsigned rs1, unsigned rs2) {
  Instr in;
  in.op = Op::CustomS;
  in.slot = static_cast<uint8_t>(slot);
  in.funct3 = static_cast<uint8_t>(funct3);
  in.vrd1 = static_cast<uint8_t>(vrd1);
  in.vrs1 = static_cast<uint8_t>(vrs1);
  in.rd = static_cast<uint8_t>(rd);
  in.rs1 = static_cast<uint8_t>(rs1);
  in.rs2 = static_cast<uint8_t>(rs2);
  return in;
}

}  // namespace vexsim
