#include "vexsim/assembler.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace vexsim {

namespace {

using K = AsmErrorKind;

struct Statement {
  unsigned line = 0;
  std::string op;  // lowercased mnemonic or directive, may be empty
  std::vector<std::string> args;
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$'; }

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

std::optional<int64_t> parse_number(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  } else if (s.size() > 2 && s[0] == '0' && (s[1] == 'b' || s[1] == 'B')) {
    base = 2;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size() || v > (uint64_t{1} << 33)) return std::nullopt;
  return neg ? -static_cast<int64_t>(v) : static_cast<int64_t>(v);
}

const std::unordered_map<std::string, unsigned>& abi_names() {
  static const std::unordered_map<std::string, unsigned> names = [] {
    std::unordered_map<std::string, unsigned> m{
        {"zero", 0}, {"ra", 1}, {"sp", 2}, {"gp", 3}, {"tp", 4}, {"t0", 5}, {"t1", 6}, {"t2", 7},
        {"s0", 8},   {"fp", 8}, {"s1", 9}, {"t3", 28}, {"t4", 29}, {"t5", 30}, {"t6", 31}};
    for (unsigned i = 0; i < 8; ++i) m["a" + std::to_string(i)] = 10 + i;
    for (unsigned i = 2; i < 12; ++i) m["s" + std::to_string(i)] = 16 + i;
    for (unsigned i = 0; i < 32; ++i) m["x" + std::to_string(i)] = i;
    return m;
  }();
  return names;
}

std::vector<Statement> split_lines(std::string_view src) {
  std::vector<Statement> out;
  unsigned line_no = 0;
  std::size_t pos = 0;
  while (pos <= src.size()) {
    std::size_t nl = src.find('\n', pos);
    if (nl == std::string_view::npos) nl = src.size();
    std::string_view line = src.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto c = line.find('#'); c != std::string_view::npos) line = line.substr(0, c);
    if (auto c = line.find("//"); c != std::string_view::npos) line = line.substr(0, c);
    std::string rest = trim(line);

    // Leading labels, possibly several.
    while (true) {
      auto colon = rest.find(':');
      if (colon == std::string::npos) break;
      std::string name = trim(rest.substr(0, colon));
      if (!is_identifier(name)) break;
      out.push_back({line_no, ":" + name, {}});
      rest = trim(rest.substr(colon + 1));
    }
    if (rest.empty()) {
      if (pos > src.size()) break;
      continue;
    }

    Statement st;
    st.line = line_no;
    std::size_t sp = 0;
    while (sp < rest.size() && !std::isspace(static_cast<unsigned char>(rest[sp]))) ++sp;
    st.op = lower(rest.substr(0, sp));
    std::string args = trim(std::string_view(rest).substr(sp));
    if (!args.empty()) {
      std::size_t start = 0;
      while (true) {
        auto comma = args.find(',', start);
        st.args.push_back(trim(std::string_view(args).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      for (const auto& a : st.args)
        if (a.empty()) throw AsmError(K::Syntax, line_no, "empty operand");
    }
    out.push_back(std::move(st));
    if (pos > src.size()) break;
  }
  return out;
}

enum class Section : uint8_t { Text, Data };

struct SectionState {
  std::optional<uint32_t> origin;
  uint32_t offset = 0;
  bool emitted = false;
  std::vector<uint8_t> bytes;
};

struct SymbolDef {
  Section section;
  uint32_t offset;
};

class Assembler {
 public:
  Assembler(std::string_view src, const CustomIsa& isa, const AsmOptions& opt)
      : isa_(isa), opt_(opt), stmts_(split_lines(src)) {}

  Image run() {
    pass(false);
    resolve_layout();
    pass(true);
    return build();
  }

 private:
  // ---- expressions ----

  struct Value {
    int64_t v = 0;
    bool symbolic = false;
  };

  class ExprParser {
   public:
    ExprParser(const Assembler& as, std::string_view s, unsigned line, uint32_t pc, bool resolve)
        : as_(as), s_(s), line_(line), pc_(pc), resolve_(resolve) {}

    Value parse() {
      Value v = sum();
      skip_ws();
      if (i_ != s_.size()) fail("unexpected '" + std::string(s_.substr(i_)) + "'");
      return v;
    }

   private:
    [[noreturn]] void fail(const std::string& m) const { throw AsmError(K::Syntax, line_, m); }

    void skip_ws() {
      while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    Value sum() {
      Value acc = term();
      while (true) {
        skip_ws();
        if (i_ >= s_.size() || (s_[i_] != '+' && s_[i_] != '-')) return acc;
        const char op = s_[i_++];
        Value rhs = term();
        acc.v = op == '+' ? acc.v + rhs.v : acc.v - rhs.v;
        acc.symbolic |= rhs.symbolic;
      }
    }

    Value term() {
      skip_ws();
      if (i_ >= s_.size()) fail("missing operand");
      const char c = s_[i_];
      if (c == '-') {
        ++i_;
        Value v = term();
        v.v = -v.v;
        return v;
      }
      if (c == '(') {
        ++i_;
        Value v = sum();
        expect(')');
        return v;
      }
      if (c == '%') {
        ++i_;
        std::size_t b = i_;
        while (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) ++i_;
        const std::string fn = lower(std::string(s_.substr(b, i_ - b)));
        expect('(');
        Value v = sum();
        expect(')');
        const auto lo = static_cast<int32_t>(static_cast<uint32_t>(v.v) << 20) >> 20;
        if (fn == "lo") {
          v.v = lo;
        } else if (fn == "hi") {
          v.v = ((static_cast<uint32_t>(v.v) - static_cast<uint32_t>(lo)) >> 12) & 0xfffff;
        } else {
          fail("unknown operator %" + fn);
        }
        return v;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t b = i_;
        while (i_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[i_]))) ++i_;
        auto n = parse_number(s_.substr(b, i_ - b));
        if (!n) fail("bad number '" + std::string(s_.substr(b, i_ - b)) + "'");
        return {*n, false};
      }
      if (c == '.' && (i_ + 1 >= s_.size() || !is_ident_char(s_[i_ + 1]))) {
        ++i_;
        return {pc_, false};
      }
      if (is_ident_start(c)) {
        std::size_t b = i_;
        while (i_ < s_.size() && is_ident_char(s_[i_])) ++i_;
        const std::string name(s_.substr(b, i_ - b));
        if (!resolve_) return {0, true};
        auto addr = as_.symbol_address(name);
        if (!addr) throw AsmError(K::UndefinedLabel, line_, "undefined symbol '" + name + "'");
        return {*addr, true};
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }

    void expect(char c) {
      skip_ws();
      if (i_ >= s_.size() || s_[i_] != c) fail(std::string("expected '") + c + "'");
      ++i_;
    }

    const Assembler& as_;
    std::string_view s_;
    std::size_t i_ = 0;
    unsigned line_;
    uint32_t pc_;
    bool resolve_;
  };

  Value eval(const std::string& s) const { return ExprParser(*this, s, line_, pc(), final_).parse(); }

  int64_t constant(const std::string& s) const {
    // Layout needs the value before symbols are placed.
    Value v = ExprParser(*this, s, line_, pc(), false).parse();
    if (v.symbolic) throw AsmError(K::Syntax, line_, "expected a constant, got '" + s + "'");
    return v.v;
  }

  std::optional<int64_t> symbol_address(const std::string& name) const {
    auto it = symbols_.find(name);
    if (it == symbols_.end()) return std::nullopt;
    const auto& sec = section(it->second.section);
    return int64_t{*sec.origin} + it->second.offset;
  }

  // ---- operands ----

  [[noreturn]] void fail(K kind, const std::string& m) const { throw AsmError(kind, line_, m); }

  void arity(const Statement& st, std::size_t lo, std::size_t hi) const {
    if (st.args.size() < lo || st.args.size() > hi)
      fail(K::OperandArity, st.op + " takes " +
                                (lo == hi ? std::to_string(lo)
                                          : std::to_string(lo) + ".." + std::to_string(hi)) +
                                " operands, got " + std::to_string(st.args.size()));
  }

  unsigned xreg(const std::string& s) const {
    auto it = abi_names().find(lower(s));
    if (it == abi_names().end()) fail(K::Syntax, "expected a register, got '" + s + "'");
    return it->second;
  }

  unsigned vreg(const std::string& s) const {
    const std::string l = lower(s);
    if (l.size() == 2 && l[0] == 'v' && l[1] >= '0' && l[1] < '0' + int{kNumVecRegs})
      return static_cast<unsigned>(l[1] - '0');
    fail(K::Syntax, "expected a vector register v0..v7, got '" + s + "'");
  }

  /// "imm(reg)" or "(reg)".
  std::pair<int64_t, unsigned> mem_operand(const std::string& s) const {
    auto open = s.rfind('(');
    if (open == std::string::npos || s.back() != ')') fail(K::Syntax, "expected imm(reg), got '" + s + "'");
    const unsigned r = xreg(trim(std::string_view(s).substr(open + 1, s.size() - open - 2)));
    const std::string off = trim(std::string_view(s).substr(0, open));
    return {off.empty() ? 0 : eval(off).v, r};
  }

  int64_t target_offset(const std::string& s) const {
    if (auto n = parse_number(s)) return *n;
    return eval(s).v - pc();
  }

  // ---- layout and emission ----

  SectionState& section(Section s) { return s == Section::Text ? text_ : data_; }
  const SectionState& section(Section s) const { return s == Section::Text ? text_ : data_; }
  SectionState& cur() { return section(cur_); }

  uint32_t pc() const {
    const auto& s = section(cur_);
    return s.origin.value_or(0) + s.offset;
  }

  void put_bytes(uint64_t value, unsigned n) {
    auto& s = cur();
    s.emitted = true;
    if (final_) {
      if (s.bytes.size() < s.offset + n) s.bytes.resize(s.offset + n);
      for (unsigned i = 0; i < n; ++i) s.bytes[s.offset + i] = static_cast<uint8_t>(value >> (8 * i));
    }
    s.offset += n;
  }

  void emit(const Instr& in) {
    if (pc() % 4) fail(K::RangeError, "instruction at unaligned address");
    uint32_t word = 0;
    if (final_) {
      try {
        word = encode(in);
      } catch (const EncodeError& e) {
        fail(K::RangeError, e.what());
      }
    }
    put_bytes(word, 4);
  }

  void set_location(uint32_t addr) {
    auto& s = cur();
    if (!s.emitted && s.offset == 0) {
      s.origin = addr;
      return;
    }
    if (!s.origin) fail(K::Syntax, ".org needs a placed section");
    if (addr < *s.origin + s.offset) fail(K::RangeError, ".org moves backwards");
    const uint32_t pad = addr - (*s.origin + s.offset);
    for (uint32_t i = 0; i < pad; ++i) put_bytes(0, 1);
  }

  void pass(bool final) {
    final_ = final;
    for (auto* s : {&text_, &data_}) {
      s->offset = 0;
      s->emitted = false;
    }
    if (final) {
      text_.origin = final_text_origin_;
      data_.origin = final_data_origin_;
    } else {
      text_.origin = opt_.base;
    }
    cur_ = Section::Text;
    for (const auto& st : stmts_) {
      line_ = st.line;
      if (st.op[0] == ':') {
        label(st.op.substr(1));
      } else if (st.op[0] == '.') {
        directive(st);
      } else {
        instruction(st);
      }
    }
    if (!final) {
      final_text_origin_ = text_.origin;
      final_data_origin_ = data_.origin;
    }
  }

  void label(const std::string& name) {
    if (final_) return;
    if (!symbols_.emplace(name, SymbolDef{cur_, cur().offset}).second)
      fail(K::DuplicateLabel, "duplicate label '" + name + "'");
  }

  void resolve_layout() {
    if (!data_.origin) {
      const uint64_t text_end = uint64_t{*text_.origin} + text_.offset;
      const uint64_t a = opt_.data_align;
      final_data_origin_ = static_cast<uint32_t>((text_end + a - 1) / a * a);
    }
  }

  void directive(const Statement& st) {
    const std::string& d = st.op;
    if (d == ".text" || d == ".data") {
      arity(st, 0, 0);
      cur_ = d == ".text" ? Section::Text : Section::Data;
    } else if (d == ".section") {
      arity(st, 1, 1);
      if (st.args[0] == ".text") cur_ = Section::Text;
      else if (st.args[0] == ".data" || st.args[0] == ".rodata" || st.args[0] == ".bss") cur_ = Section::Data;
      else fail(K::Syntax, "unknown section " + st.args[0]);
    } else if (d == ".globl" || d == ".global") {
      arity(st, 1, 1);
    } else if (d == ".org") {
      arity(st, 1, 1);
      const int64_t addr = constant(st.args[0]);
      if (addr < 0 || addr > UINT32_MAX) fail(K::RangeError, ".org address out of range");
      set_location(static_cast<uint32_t>(addr));
    } else if (d == ".align" || d == ".p2align") {
      arity(st, 1, 1);
      const int64_t k = constant(st.args[0]);
      if (k < 0 || k > 12) fail(K::RangeError, ".align exponent must be in 0..12");
      const uint32_t a = 1u << k;
      if (!cur().origin && a > opt_.data_align)
        fail(K::RangeError, ".align beyond the data section alignment needs .org");
      // Code is padded with nops once it is word aligned.
      while (pc() % a) {
        if (cur_ == Section::Text && pc() % 4 == 0) put_bytes(0x00000013, 4);
        else put_bytes(0, 1);
      }
    } else if (d == ".space" || d == ".zero" || d == ".skip") {
      arity(st, 1, 2);
      const int64_t n = constant(st.args[0]);
      const int64_t fill = st.args.size() > 1 ? constant(st.args[1]) : 0;
      if (n < 0 || n > (int64_t{1} << 28)) fail(K::RangeError, ".space size out of range");
      for (int64_t i = 0; i < n; ++i) put_bytes(static_cast<uint64_t>(fill), 1);
    } else if (d == ".word" || d == ".half" || d == ".byte") {
      if (st.args.empty()) fail(K::OperandArity, d + " needs at least one value");
      const unsigned n = d == ".word" ? 4 : d == ".half" ? 2 : 1;
      const int64_t lo = -(int64_t{1} << (8 * n - 1));
      const int64_t hi = (int64_t{1} << (8 * n)) - 1;
      for (const auto& a : st.args) {
        const int64_t v = eval(a).v;
        if (final_ && (v < lo || v > hi)) fail(K::RangeError, "value does not fit in " + d);
        put_bytes(static_cast<uint64_t>(v), n);
      }
    } else {
      fail(K::UnknownMnemonic, "unknown directive " + d);
    }
  }

  Instr make(Op op, unsigned rd, unsigned rs1, unsigned rs2, int64_t imm) const {
    Instr in;
    in.op = op;
    in.rd = static_cast<uint8_t>(rd);
    in.rs1 = static_cast<uint8_t>(rs1);
    in.rs2 = static_cast<uint8_t>(rs2);
    if (final_ && (imm < INT32_MIN || imm > INT32_MAX)) fail(K::RangeError, "immediate out of range");
    in.imm = static_cast<int32_t>(imm);
    return in;
  }

  static std::optional<Op> base_op(const std::string& m) {
    static const std::unordered_map<std::string, Op> table = [] {
      std::unordered_map<std::string, Op> t;
      for (int i = 0; i <= static_cast<int>(Op::Remu); ++i) {
        const auto op = static_cast<Op>(i);
        t.emplace(std::string(op_mnemonic(op)), op);
      }
      return t;
    }();
    auto it = table.find(m);
    if (it == table.end()) return std::nullopt;
    return it->second;
  }

  unsigned fence_bits(const std::string& s) const {
    const std::string l = lower(s);
    if (l == "0") return 0;
    unsigned bits = 0;
    for (char c : l) {
      const auto p = std::string_view("iorw").find(c);
      if (p == std::string_view::npos) fail(K::Syntax, "bad fence set '" + s + "'");
      bits |= 8u >> p;
    }
    return bits;
  }

  void instruction(const Statement& st) {
    const std::string& m = st.op;
    const auto& a = st.args;

    if (auto match = isa_.find(m)) {
      const bool iprime = match->info->type == CustomType::IPrime;
      arity(st, 0, iprime ? 6 : 5);
      std::array<unsigned, 6> f{};
      for (std::size_t i = 0; i < a.size(); ++i) {
        const bool vector = iprime ? i < 4 : i < 2;
        f[i] = vector ? vreg(a[i]) : xreg(a[i]);
      }
      emit(iprime ? make_custom_i(match->slot, match->funct3, f[0], f[1], f[2], f[3], f[4], f[5])
                  : make_custom_s(match->slot, match->funct3, f[0], f[1], f[2], f[3], f[4]));
      return;
    }

    if (auto op = base_op(m)) {
      base_instruction(st, *op);
      return;
    }
    pseudo(st);
  }

  void base_instruction(const Statement& st, Op op) {
    const auto& a = st.args;
    switch (op_class(op)) {
      case OpClass::Load: {
        arity(st, 2, 2);
        auto [off, base] = mem_operand(a[1]);
        emit(make(op, xreg(a[0]), base, 0, off));
        return;
      }
      case OpClass::Store: {
        arity(st, 2, 2);
        auto [off, base] = mem_operand(a[1]);
        emit(make(op, 0, base, xreg(a[0]), off));
        return;
      }
      case OpClass::Branch:
        arity(st, 3, 3);
        emit(make(op, 0, xreg(a[0]), xreg(a[1]), target_offset(a[2])));
        return;
      default:
        break;
    }
    switch (op) {
      case Op::Lui:
      case Op::Auipc: {
        arity(st, 2, 2);
        int64_t v = eval(a[1]).v;
        if (final_ && (v < -(1 << 19) || v > 0xfffff)) fail(K::RangeError, "upper immediate out of range");
        emit(make(op, xreg(a[0]), 0, 0, v & 0xfffff));
        return;
      }
      case Op::Jal:
        arity(st, 1, 2);
        if (a.size() == 1) emit(make(op, 1, 0, 0, target_offset(a[0])));
        else emit(make(op, xreg(a[0]), 0, 0, target_offset(a[1])));
        return;
      case Op::Jalr:
        arity(st, 1, 3);
        if (a.size() == 1) {
          emit(make(op, 1, xreg(a[0]), 0, 0));
        } else if (a.size() == 2 && a[1].find('(') != std::string::npos) {
          auto [off, base] = mem_operand(a[1]);
          emit(make(op, xreg(a[0]), base, 0, off));
        } else {
          emit(make(op, xreg(a[0]), xreg(a[1]), 0, a.size() == 3 ? eval(a[2]).v : 0));
        }
        return;
      case Op::Addi: case Op::Slti: case Op::Sltiu: case Op::Xori: case Op::Ori: case Op::Andi:
      case Op::Slli: case Op::Srli: case Op::Srai:
        arity(st, 3, 3);
        emit(make(op, xreg(a[0]), xreg(a[1]), 0, eval(a[2]).v));
        return;
      case Op::Fence:
        if (a.empty()) {
          emit(make(op, 0, 0, 0, 0xff));
        } else {
          arity(st, 2, 2);
          emit(make(op, 0, 0, 0, (fence_bits(a[0]) << 4) | fence_bits(a[1])));
        }
        return;
      case Op::Ecall:
      case Op::Ebreak:
        arity(st, 0, 0);
        emit(make(op, 0, 0, 0, 0));
        return;
      default:
        arity(st, 3, 3);
        emit(make(op, xreg(a[0]), xreg(a[1]), xreg(a[2]), 0));
        return;
    }
  }

  void pseudo(const Statement& st) {
    const std::string& m = st.op;
    const auto& a = st.args;
    if (m == "nop") {
      arity(st, 0, 0);
      emit(make(Op::Addi, 0, 0, 0, 0));
    } else if (m == "li") {
      arity(st, 2, 2);
      load_immediate(xreg(a[0]), a[1]);
    } else if (m == "la") {
      arity(st, 2, 2);
      const unsigned rd = xreg(a[0]);
      const uint32_t here = pc();
      const auto delta = static_cast<uint32_t>(eval(a[1]).v - here);
      const auto lo = static_cast<int32_t>(delta << 20) >> 20;
      emit(make(Op::Auipc, rd, 0, 0, ((delta - static_cast<uint32_t>(lo)) >> 12) & 0xfffff));
      emit(make(Op::Addi, rd, rd, 0, lo));
    } else if (m == "mv") {
      arity(st, 2, 2);
      emit(make(Op::Addi, xreg(a[0]), xreg(a[1]), 0, 0));
    } else if (m == "not") {
      arity(st, 2, 2);
      emit(make(Op::Xori, xreg(a[0]), xreg(a[1]), 0, -1));
    } else if (m == "neg") {
      arity(st, 2, 2);
      emit(make(Op::Sub, xreg(a[0]), 0, xreg(a[1]), 0));
    } else if (m == "seqz") {
      arity(st, 2, 2);
      emit(make(Op::Sltiu, xreg(a[0]), xreg(a[1]), 0, 1));
    } else if (m == "snez") {
      arity(st, 2, 2);
      emit(make(Op::Sltu, xreg(a[0]), 0, xreg(a[1]), 0));
    } else if (m == "j") {
      arity(st, 1, 1);
      emit(make(Op::Jal, 0, 0, 0, target_offset(a[0])));
    } else if (m == "call") {
      arity(st, 1, 1);
      emit(make(Op::Jal, 1, 0, 0, target_offset(a[0])));
    } else if (m == "jr") {
      arity(st, 1, 1);
      emit(make(Op::Jalr, 0, xreg(a[0]), 0, 0));
    } else if (m == "ret") {
      arity(st, 0, 0);
      emit(make(Op::Jalr, 0, 1, 0, 0));
    } else if (m == "beqz" || m == "bnez" || m == "bltz" || m == "bgez" || m == "blez" || m == "bgtz") {
      arity(st, 2, 2);
      const unsigned r = xreg(a[0]);
      const int64_t off = target_offset(a[1]);
      if (m == "beqz") emit(make(Op::Beq, 0, r, 0, off));
      else if (m == "bnez") emit(make(Op::Bne, 0, r, 0, off));
      else if (m == "bltz") emit(make(Op::Blt, 0, r, 0, off));
      else if (m == "bgez") emit(make(Op::Bge, 0, r, 0, off));
      else if (m == "blez") emit(make(Op::Bge, 0, 0, r, off));
      else emit(make(Op::Blt, 0, 0, r, off));
    } else if (m == "bgt" || m == "ble" || m == "bgtu" || m == "bleu") {
      arity(st, 3, 3);
      const Op op = m == "bgt" ? Op::Blt : m == "ble" ? Op::Bge : m == "bgtu" ? Op::Bltu : Op::Bgeu;
      emit(make(op, 0, xreg(a[1]), xreg(a[0]), target_offset(a[2])));
    } else {
      fail(K::UnknownMnemonic, "unknown mnemonic '" + m + "'");
    }
  }

  void load_immediate(unsigned rd, const std::string& expr) {
    // Constants get the short form; symbolic values always take two words so
    // the layout pass can size them without knowing the value.
    const Value probe = ExprParser(*this, expr, line_, pc(), false).parse();
    const Value v = probe.symbolic ? eval(expr) : probe;
    if (final_ && (v.v < INT32_MIN || v.v > UINT32_MAX)) fail(K::RangeError, "li value out of 32-bit range");
    const auto u = static_cast<uint32_t>(v.v);
    const auto lo = static_cast<int32_t>(u << 20) >> 20;
    const uint32_t hi = ((u - static_cast<uint32_t>(lo)) >> 12) & 0xfffff;
    if (!probe.symbolic && hi == 0) {
      emit(make(Op::Addi, rd, 0, 0, lo));
      return;
    }
    emit(make(Op::Lui, rd, 0, 0, hi));
    if (probe.symbolic || lo != 0) emit(make(Op::Addi, rd, rd, 0, lo));
  }

  Image build() const {
    Image img;
    std::vector<const SectionState*> used;
    for (const auto* s : {&text_, &data_})
      if (!s->bytes.empty()) used.push_back(s);
    std::sort(used.begin(), used.end(), [](auto* x, auto* y) { return *x->origin < *y->origin; });
    img.base = used.empty() ? *text_.origin : *used.front()->origin;
    for (const auto* s : used) {
      const uint32_t at = *s->origin - img.base;
      if (at < img.bytes.size()) throw AsmError(K::RangeError, 0, "text and data sections overlap");
      img.bytes.resize(at);
      img.bytes.insert(img.bytes.end(), s->bytes.begin(), s->bytes.end());
    }
    for (const auto& [name, def] : symbols_) img.symbols[name] = static_cast<uint32_t>(*symbol_address(name));
    auto start = img.symbols.find("_start");
    img.entry = start != img.symbols.end() ? start->second : *text_.origin;
    return img;
  }

  const CustomIsa& isa_;
  AsmOptions opt_;
  std::vector<Statement> stmts_;
  std::map<std::string, SymbolDef> symbols_;
  SectionState text_, data_;
  std::optional<uint32_t> final_text_origin_, final_data_origin_;
  Section cur_ = Section::Text;
  unsigned line_ = 0;
  bool final_ = false;
};

}  // namespace

std::string_view asm_error_name(AsmErrorKind kind) {
  switch (kind) {
    case K::UnknownMnemonic: return "UnknownMnemonic";
    case K::UndefinedLabel: return "UndefinedLabel";
    case K::OperandArity: return "OperandArity";
    case K::RangeError: return "RangeError";
    case K::Syntax: return "Syntax";
    case K::DuplicateLabel: return "DuplicateLabel";
  }
  return "?";
}

AsmError::AsmError(AsmErrorKind kind, unsigned line, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ": " + std::string(asm_error_name(kind)) +
                         ": " + msg),
      kind_(kind),
      line_(line) {}

Image assemble(std::string_view source, const CustomIsa& isa, const AsmOptions& options) {
  return Assembler(source, isa, options).run();
}

std::string link_and_dump(const Image& image, const CustomIsa& isa) {
  std::multimap<uint32_t, std::string> labels;
  for (const auto& [name, addr] : image.symbols) labels.emplace(addr, name);
  std::string out;
  char buf[64];
  auto emit_labels = [&](uint32_t lo, uint32_t hi) {
    for (auto it = labels.lower_bound(lo); it != labels.end() && it->first < hi; ++it)
      out += it->second + ":\n";
  };
  std::size_t i = 0;
  for (; i + 4 <= image.bytes.size(); i += 4) {
    const uint32_t addr = image.base + static_cast<uint32_t>(i);
    emit_labels(addr, addr + 4);
    const uint32_t w = uint32_t{image.bytes[i]} | uint32_t{image.bytes[i + 1]} << 8 |
                       uint32_t{image.bytes[i + 2]} << 16 | uint32_t{image.bytes[i + 3]} << 24;
    std::string text;
    // Words that decode but do not re-encode to themselves (a set reserved
    // bit) are listed raw so the listing reassembles exactly.
    if (auto in = decode(w, isa); in && encode(*in) == w) {
      text = disassemble(*in, isa);
    } else {
      std::snprintf(buf, sizeof buf, ".word 0x%08x", w);
      text = buf;
    }
    std::snprintf(buf, sizeof buf, "0x%08x: %08x  ", addr, w);
    out += buf + text + "\n";
  }
  for (; i < image.bytes.size(); ++i) {
    const uint32_t addr = image.base + static_cast<uint32_t>(i);
    emit_labels(addr, addr + 1);
    std::snprintf(buf, sizeof buf, "0x%08x: %02x        .byte 0x%02x\n", addr, image.bytes[i], image.bytes[i]);
    out += buf;
  }
  return out;
}

}  // namespace vexsim
