#include "vexsim/core.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <cstring>

namespace vexsim {

namespace {

bool writes_rd(Op op) {
  switch (op_class(op)) {
    case OpClass::Branch:
    case OpClass::Store:
    case OpClass::System:
    case OpClass::Custom:
      return false;
    default:
      return true;
  }
}

uint32_t mul_div(Op op, uint32_t a, uint32_t b) {
  const auto sa = static_cast<int32_t>(a);
  const auto sb = static_cast<int32_t>(b);
  switch (op) {
    case Op::Mul:
      return a * b;
    case Op::Mulh:
      return static_cast<uint32_t>((int64_t{sa} * int64_t{sb}) >> 32);
    case Op::Mulhsu:
      return static_cast<uint32_t>((int64_t{sa} * static_cast<int64_t>(b)) >> 32);
    case Op::Mulhu:
      return static_cast<uint32_t>((uint64_t{a} * uint64_t{b}) >> 32);
    case Op::Div:
      if (b == 0) return UINT32_MAX;
      if (sa == INT32_MIN && sb == -1) return a;
      return static_cast<uint32_t>(sa / sb);
    case Op::Divu:
      return b == 0 ? UINT32_MAX : a / b;
    case Op::Rem:
      if (b == 0) return a;
      if (sa == INT32_MIN && sb == -1) return 0;
      return static_cast<uint32_t>(sa % sb);
    case Op::Remu:
      return b == 0 ? a : a % b;
    default:
      return 0;
  }
}

uint32_t alu(Op op, uint32_t a, uint32_t b) {
  switch (op) {
    case Op::Add: case Op::Addi: return a + b;
    case Op::Sub: return a - b;
    case Op::Sll: case Op::Slli: return a << (b & 31);
    case Op::Slt: case Op::Slti: return static_cast<int32_t>(a) < static_cast<int32_t>(b);
    case Op::Sltu: case Op::Sltiu: return a < b;
    case Op::Xor: case Op::Xori: return a ^ b;
    case Op::Srl: case Op::Srli: return a >> (b & 31);
    case Op::Sra: case Op::Srai: return static_cast<uint32_t>(static_cast<int32_t>(a) >> (b & 31));
    case Op::Or: case Op::Ori: return a | b;
    case Op::And: case Op::Andi: return a & b;
    default: return 0;
  }
}

bool branch_taken(Op op, uint32_t a, uint32_t b) {
  switch (op) {
    case Op::Beq: return a == b;
    case Op::Bne: return a != b;
    case Op::Blt: return static_cast<int32_t>(a) < static_cast<int32_t>(b);
    case Op::Bge: return static_cast<int32_t>(a) >= static_cast<int32_t>(b);
    case Op::Bltu: return a < b;
    case Op::Bgeu: return a >= b;
    default: return false;
  }
}

unsigned access_bytes(Op op) {
  switch (op) {
    case Op::Lb: case Op::Lbu: case Op::Sb: return 1;
    case Op::Lh: case Op::Lhu: case Op::Sh: return 2;
    default: return 4;
  }
}

/// Base registers an instruction reads (x0 entries are harmless).
std::array<uint8_t, 4> x_sources(const Instr& in, unsigned& n) {
  std::array<uint8_t, 4> s{};
  n = 0;
  switch (op_class(in.op)) {
    case OpClass::Branch:
    case OpClass::Store:
    case OpClass::MulDiv:
      s[n++] = in.rs1;
      s[n++] = in.rs2;
      break;
    case OpClass::Load:
      s[n++] = in.rs1;
      break;
    case OpClass::Jump:
      if (in.op == Op::Jalr) s[n++] = in.rs1;
      break;
    case OpClass::System:
      if (in.op == Op::Ecall) s = {10, 11, 12, 17}, n = 4;
      break;
    case OpClass::Alu:
      if (in.op != Op::Lui && in.op != Op::Auipc) s[n++] = in.rs1;
      if (in.op >= Op::Add && in.op <= Op::And) s[n++] = in.rs2;
      break;
    case OpClass::Custom:
      break;
  }
  return s;
}

}  // namespace

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::Running: return "running";
    case StopReason::Exited: return "exited";
    case StopReason::Trapped: return "trapped";
    case StopReason::MaxCyclesExceeded: return "max_cycles_exceeded";
  }
  return "?";
}

void SimConfig::validate() const {
  if (vlen_bits < 64 || vlen_bits > kMaxVlenBits || !std::has_single_bit(vlen_bits))
    throw ConfigError("vlen_bits must be a power of two in [64, 1024]");
  cache.validate(vlen_bits);
  if (div_cycles < 1) throw ConfigError("div_cycles must be >= 1");
  const uint32_t llc_bytes = cache.llc_block_bits / 8;
  if (mem_bytes == 0 || mem_bytes % llc_bytes || mem_base % llc_bytes)
    throw ConfigError("memory base and size must be multiples of the LLC block");
  if (uint64_t{mem_base} + mem_bytes > (uint64_t{1} << 32)) throw ConfigError("memory exceeds 4 GiB");
}

class Core::DataPort : public VectorMemoryPort {
 public:
  explicit DataPort(MemHierarchy& mem) : mem_(mem) {}

  unsigned vector_access(MemRequest& req, std::span<uint8_t> bytes, uint64_t now) override {
    const uint64_t start = std::max(now, mem_.dl1_ready_at());
    const auto kind = req.kind == MemRequest::Kind::Load ? AccessKind::Read : AccessKind::Write;
    const AccessResult r = mem_.data_access(req.addr, kind, bytes, start);
    return static_cast<unsigned>(start - now) + r.latency;
  }

 private:
  MemHierarchy& mem_;
};

Core::Core(const SimConfig& config)
    : config_((config.validate(), config)),
      main_(config.mem_base, config.mem_bytes),
      mem_(config.cache, main_, config.replacement, config.seed),
      vu_(config.vlen_bits),
      port_(std::make_unique<DataPort>(mem_)),
      regs_(config.vlen_bits) {}

Core::~Core() = default;

void Core::load_image(const Image& image) {
  if (!main_.contains(image.base, image.bytes.size()))
    throw ConfigError("image does not fit in simulated memory");
  poke(image.base, image.bytes);
  pc_ = image.entry;
  regs_.write_x(2, config_.mem_base + config_.mem_bytes - 16);
}

uint32_t Core::peek32(uint32_t addr) const {
  uint8_t b[4];
  mem_.peek(addr, b);
  uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}

void Core::poke(uint32_t addr, std::span<const uint8_t> bytes) {
  if (bytes.empty()) return;
  auto dst = main_.span(addr, static_cast<uint32_t>(bytes.size()));
  std::copy(bytes.begin(), bytes.end(), dst.begin());
}

void Core::flush() {
  vu_.retire_through(UINT64_MAX - 1, regs_);
  mem_.flush_all();
}

const ExecStats& Core::stats() {
  stats_.cycles = cycle_;
  stats_.mem = mem_.stats();
  return stats_;
}

void Core::stall_until(uint64_t until, uint64_t& now, uint64_t& counter) {
  if (until <= now) return;
  counter += until - now;
  now = until;
}

void Core::wait_dcache(uint64_t& now) { stall_until(mem_.dl1_ready_at(), now, stats_.stall_dcache); }

void Core::wait_sources(const Instr& in, uint64_t& now) {
  unsigned n = 0;
  const auto src = x_sources(in, n);
  uint64_t ready = now;
  bool from_load = false;
  for (unsigned i = 0; i < n; ++i) {
    const unsigned r = src[i];
    if (sb_.x_pending(r, now) && sb_.x_ready[r] > ready) {
      ready = sb_.x_ready[r];
      from_load = x_load_writer_[r];
    }
  }
  // Keep a late custom-unit writeback from landing after this write.
  if (writes_rd(in.op) && in.rd != 0 && x_deferred_[in.rd] > ready) {
    ready = x_deferred_[in.rd];
    from_load = false;
  }
  stall_until(ready, now, from_load ? stats_.stall_load_use : stats_.stall_vector_data);
  vu_.retire_through(now, regs_);
}

void Core::check_reads(const Instr& in, uint64_t now) {
  unsigned n = 0;
  const auto src = x_sources(in, n);
  for (unsigned i = 0; i < n; ++i)
    if (sb_.x_pending(src[i], now)) ++stats_.scoreboard_violations;
}

void Core::count_retired(const Instr& in) {
  ++stats_.retired;
  switch (op_class(in.op)) {
    case OpClass::Alu: ++stats_.alu; break;
    case OpClass::Branch: ++stats_.branch; break;
    case OpClass::Jump: ++stats_.jump; break;
    case OpClass::Load: ++stats_.load; break;
    case OpClass::Store: ++stats_.store; break;
    case OpClass::MulDiv: ++stats_.muldiv; break;
    case OpClass::System: ++stats_.system; break;
    case OpClass::Custom: break;
  }
}

void Core::host_call(uint64_t now) {
  const uint32_t selector = regs_.x[17];
  switch (selector) {
    case host::kExit:
      halted_ = true;
      stats_.stop = StopReason::Exited;
      stats_.exit_code = static_cast<int32_t>(regs_.x[10]);
      vu_.retire_through(UINT64_MAX - 1, regs_);
      return;
    case host::kWrite: {
      const uint32_t addr = regs_.x[11];
      const uint32_t len = regs_.x[12];
      if (!main_.contains(addr, len)) throw TrapError(TrapKind::OutOfRange, addr, "write buffer out of range");
      std::string buf(len, '\0');
      mem_.peek(addr, std::span<uint8_t>(reinterpret_cast<uint8_t*>(buf.data()), len));
      output_ += buf;
      regs_.write_x(10, len);
      return;
    }
    case host::kCycles:
      regs_.write_x(10, static_cast<uint32_t>(now));
      regs_.write_x(11, static_cast<uint32_t>(now >> 32));
      return;
    default:
      throw TrapError(TrapKind::IllegalInstruction, pc_,
                      "unknown host call " + std::to_string(selector));
  }
}

void Core::execute(const Instr& in, uint64_t& now, unsigned& cost) {
  const uint32_t a = regs_.x[in.rs1];
  const uint32_t b = regs_.x[in.rs2];
  const auto imm = static_cast<uint32_t>(in.imm);
  uint32_t next_pc = pc_ + 4;
  cost = 1;

  auto write_now = [&](uint32_t value) {
    if (in.rd == 0) return;
    regs_.x[in.rd] = value;
    sb_.x_ready[in.rd] = 0;
    x_load_writer_[in.rd] = false;
  };

  switch (op_class(in.op)) {
    case OpClass::Alu:
      if (in.op == Op::Lui) write_now(imm << 12);
      else if (in.op == Op::Auipc) write_now(pc_ + (imm << 12));
      else write_now(alu(in.op, a, in.op >= Op::Add ? b : imm));
      break;
    case OpClass::MulDiv:
      write_now(mul_div(in.op, a, b));
      if (in.op >= Op::Div) cost = config_.div_cycles;
      break;
    case OpClass::Branch:
      if (branch_taken(in.op, a, b)) next_pc = pc_ + imm;
      break;
    case OpClass::Jump:
      next_pc = in.op == Op::Jal ? pc_ + imm : (a + imm) & ~1u;
      write_now(pc_ + 4);
      break;
    case OpClass::Load: {
      wait_dcache(now);
      const unsigned n = access_bytes(in.op);
      const AccessResult r = mem_.read(a + imm, n, now);
      uint32_t v = r.value;
      if (in.op == Op::Lb) v = static_cast<uint32_t>(static_cast<int8_t>(v));
      if (in.op == Op::Lh) v = static_cast<uint32_t>(static_cast<int16_t>(v));
      if (in.rd != 0) {
        regs_.x[in.rd] = v;
        sb_.x_ready[in.rd] = now + r.latency;
        x_load_writer_[in.rd] = true;
      }
      break;
    }
    case OpClass::Store:
      wait_dcache(now);
      mem_.write(a + imm, access_bytes(in.op), b, now);
      break;
    case OpClass::System:
      if (in.op == Op::Ebreak) throw TrapError(TrapKind::Ebreak, pc_, "ebreak");
      if (in.op == Op::Ecall) host_call(now);
      break;
    case OpClass::Custom:
      break;
  }
  pc_ = next_pc;
}

StepResult Core::step() {
  StepResult result;
  if (halted_) {
    result.trap = TrapKind::IllegalInstruction;
    return result;
  }
  uint64_t now = cycle_;
  const uint64_t stalls_before = stats_.stalls();
  unsigned cost = 1;
  try {
    const FetchResult f = mem_.fetch_instr(pc_, now);
    stall_until(now + f.stall, now, stats_.stall_icache);
    const auto in = decode(f.word, vu_.isa());
    if (!in) throw TrapError(TrapKind::IllegalInstruction, pc_, "illegal instruction");
    const uint32_t pc = pc_;
    const uint64_t complete_hint = now;

    if (in->is_custom()) {
      const std::size_t handle = *vu_.find(in->slot, in->funct3);
      const CustomInstrDescriptor& desc = vu_.descriptor(handle);
      IssueResult r;
      while (true) {
        if (desc.uses_memory) wait_dcache(now);
        vu_.retire_through(now, regs_);
        r = vu_.issue(*in, regs_, sb_, now, port_.get());
        if (r.status == IssueStatus::Accepted) break;
        uint64_t& counter = r.status == IssueStatus::StallStructural ? stats_.stall_structural
                            : (x_load_writer_[in->rs1] && sb_.x_pending(in->rs1, now)) ||
                                    (x_load_writer_[in->rs2] && sb_.x_pending(in->rs2, now))
                                ? stats_.stall_load_use
                                : stats_.stall_vector_data;
        stall_until(r.retry_at, now, counter);
      }
      if (desc.use.writes_rd && in->rd != 0) {
        x_deferred_[in->rd] = r.completes_at;
        x_load_writer_[in->rd] = false;
      }
      ++stats_.custom[desc.mnemonic];
      ++stats_.retired;
      pc_ += 4;
      if (config_.trace) trace_.push_back({pc, f.word, now, r.completes_at});
    } else {
      wait_sources(*in, now);
      if (config_.check_scoreboard) check_reads(*in, now);
      const uint64_t issue = now;
      execute(*in, now, cost);
      count_retired(*in);
      if (config_.trace) {
        const uint64_t done = writes_rd(in->op) && in->rd != 0 && sb_.x_ready[in->rd] > issue
                                  ? sb_.x_ready[in->rd]
                                  : now + cost;
        trace_.push_back({pc, f.word, now, std::max(done, complete_hint)});
      }
    }
    result.retired = true;
  } catch (const TrapError& e) {
    halted_ = true;
    stats_.stop = StopReason::Trapped;
    stats_.trap = e.kind();
    stats_.trap_pc = pc_;
    stats_.trap_message = e.what();
    result.trap = e.kind();
    cost = 1;
  }
  stats_.consumed += cost;
  cycle_ = now + cost;
  result.cycles_consumed = static_cast<unsigned>(cost + (stats_.stalls() - stalls_before));
  return result;
}

const ExecStats& Core::run(uint64_t max_cycles) {
  while (!halted_) {
    if (cycle_ >= max_cycles) {
      stats_.stop = StopReason::MaxCyclesExceeded;
      break;
    }
    step();
  }
  return stats();
}

}  // namespace vexsim
