#include "vexsim/vector_unit.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "vexsim/trap.hpp"

namespace vexsim {

namespace {

void apply_to_lanes(const CasNetwork& net, const uint32_t* in, uint32_t* out) {
  std::array<int32_t, 2 * kMaxLanes> keys{};
  for (unsigned i = 0; i < net.n; ++i) keys[i] = static_cast<int32_t>(in[i]);
  apply_cas_network(net, std::span<int32_t>(keys.data(), net.n));
  for (unsigned i = 0; i < net.n; ++i) out[i] = static_cast<uint32_t>(keys[i]);
}

}  // namespace

VectorRegisterFile::VectorRegisterFile(unsigned vlen_bits) : vlen_bits_(vlen_bits) {
  if (vlen_bits < 64 || vlen_bits > kMaxVlenBits || !std::has_single_bit(vlen_bits))
    throw std::invalid_argument("vlen_bits must be a power of two in [64, 1024]");
}

unsigned sort_latency(unsigned vlen_bits) {
  return static_cast<unsigned>(gen_sort_network(vlen_bits / 32).depth());
}

unsigned merge_latency(unsigned vlen_bits) {
  return static_cast<unsigned>(gen_merge_network(2 * (vlen_bits / 32)).depth());
}

unsigned psum_latency(unsigned vlen_bits) { return scan_stage_count(vlen_bits / 32); }

std::vector<CustomInstrDescriptor> builtin_descriptors(unsigned vlen_bits) {
  const unsigned lanes = vlen_bits / 32;
  std::vector<CustomInstrDescriptor> out;

  CustomInstrDescriptor lv;
  lv.mnemonic = "c0_lv";
  lv.slot = 0;
  lv.funct3 = 0;
  lv.type = CustomType::SPrime;
  lv.uses_memory = true;
  lv.use = {.reads_rs1 = true, .reads_rs2 = true, .reads_vrs1 = false, .reads_vrs2 = false,
            .reads_vrd1 = false, .writes_rd = false, .writes_vrd1 = true, .writes_vrd2 = false};
  lv.semantics = [](const CustomInputs& in, CustomOutputs& out, std::any&) {
    out.mem = MemRequest{MemRequest::Kind::Load, in.rs1 + in.rs2, {}};
  };
  out.push_back(std::move(lv));

  // The stored register is named by the vrd1 field.
  CustomInstrDescriptor sv;
  sv.mnemonic = "c0_sv";
  sv.slot = 0;
  sv.funct3 = 1;
  sv.type = CustomType::SPrime;
  sv.uses_memory = true;
  sv.use = {.reads_rs1 = true, .reads_rs2 = true, .reads_vrs1 = false, .reads_vrs2 = false,
            .reads_vrd1 = true, .writes_rd = false, .writes_vrd1 = false, .writes_vrd2 = false};
  sv.semantics = [](const CustomInputs& in, CustomOutputs& out, std::any&) {
    out.mem = MemRequest{MemRequest::Kind::Store, in.rs1 + in.rs2, in.vrd1_src};
  };
  out.push_back(std::move(sv));

  const OperandUse one_in_one_out{.reads_rs1 = false, .reads_rs2 = false, .reads_vrs1 = true,
                                  .reads_vrs2 = false, .reads_vrd1 = false, .writes_rd = false,
                                  .writes_vrd1 = true, .writes_vrd2 = false};

  auto merge_net = std::make_shared<const CasNetwork>(gen_merge_network(2 * lanes));
  CustomInstrDescriptor merge;
  merge.mnemonic = "c1_merge";
  merge.slot = 1;
  merge.funct3 = 0;
  merge.latency_cycles = static_cast<unsigned>(merge_net->depth());
  merge.use = {.reads_rs1 = false, .reads_rs2 = false, .reads_vrs1 = true, .reads_vrs2 = true,
               .reads_vrd1 = false, .writes_rd = false, .writes_vrd1 = true, .writes_vrd2 = true};
  merge.semantics = [merge_net](const CustomInputs& in, CustomOutputs& out, std::any&) {
    std::array<uint32_t, 2 * kMaxLanes> joined{};
    std::copy_n(in.vrs1.begin(), in.lanes, joined.begin());
    std::copy_n(in.vrs2.begin(), in.lanes, joined.begin() + in.lanes);
    apply_to_lanes(*merge_net, joined.data(), joined.data());
    std::copy_n(joined.begin(), in.lanes, out.vrd1.begin());
    std::copy_n(joined.begin() + in.lanes, in.lanes, out.vrd2.begin());
  };
  out.push_back(std::move(merge));

  auto sort_net = std::make_shared<const CasNetwork>(gen_sort_network(lanes));
  CustomInstrDescriptor sort;
  sort.mnemonic = "c2_sort";
  sort.slot = 2;
  sort.funct3 = 0;
  sort.latency_cycles = static_cast<unsigned>(sort_net->depth());
  sort.use = one_in_one_out;
  sort.semantics = [sort_net](const CustomInputs& in, CustomOutputs& out, std::any&) {
    apply_to_lanes(*sort_net, in.vrs1.data(), out.vrd1.data());
  };
  out.push_back(std::move(sort));

  // Both scan instructions share one carry register.
  auto carry = std::make_shared<uint32_t>(0);
  auto scan = [](bool reset) {
    return [reset](const CustomInputs& in, CustomOutputs& out, std::any& state) {
      auto& c = *std::any_cast<std::shared_ptr<uint32_t>&>(state);
      if (reset) c = 0;
      out.vrd1 = in.vrs1;
      c = psum_exec(std::span<uint32_t>(out.vrd1.data(), in.lanes), c);
    };
  };
  for (unsigned f3 : {0u, 1u}) {
    CustomInstrDescriptor psum;
    psum.mnemonic = f3 == 0 ? "c3_psum" : "c3_psum_init";
    psum.slot = 3;
    psum.funct3 = f3;
    psum.latency_cycles = scan_stage_count(lanes);
    psum.use = one_in_one_out;
    psum.semantics = scan(f3 == 1);
    psum.state = carry;
    out.push_back(std::move(psum));
  }
  return out;
}

VectorUnit::VectorUnit(unsigned vlen_bits, bool with_builtins) : vlen_bits_(vlen_bits) {
  VectorRegisterFile check(vlen_bits);  // validates the width
  if (with_builtins)
    for (auto& d : builtin_descriptors(vlen_bits)) register_custom_instr(std::move(d));
}

std::size_t VectorUnit::register_custom_instr(CustomInstrDescriptor desc) {
  if (desc.latency_cycles < 1) throw std::invalid_argument("latency_cycles must be >= 1");
  if (!desc.semantics) throw std::invalid_argument("descriptor without semantics");
  isa_.add(desc.slot, desc.funct3, desc.type, desc.mnemonic);
  const std::size_t handle = descs_.size();
  by_point_[desc.slot * 8 + desc.funct3] = handle;
  descs_.push_back(std::move(desc));
  busy_until_.push_back(0);
  return handle;
}

std::optional<std::size_t> VectorUnit::find(unsigned slot, unsigned funct3) const {
  if (slot >= kNumCustomSlots || funct3 >= 8) return std::nullopt;
  return by_point_[slot * 8 + funct3];
}

IssueResult VectorUnit::issue(const Instr& instr, const RegisterFiles& regs, Scoreboard& sb,
                              uint64_t now, VectorMemoryPort* mem) {
  const auto handle = find(instr.slot, instr.funct3);
  if (!handle || !instr.is_custom())
    throw TrapError(TrapKind::IllegalInstruction, 0, "no custom instruction at this point");
  auto& desc = descs_[*handle];
  const OperandUse& use = desc.use;
  const bool iprime = instr.op == Op::CustomI;

  uint64_t ready = now;
  auto need_x = [&](bool used, unsigned r) {
    if (used && sb.x_pending(r, now)) ready = std::max(ready, sb.x_ready[r]);
  };
  auto need_v = [&](bool used, unsigned r) {
    if (used && sb.v_pending(r, now)) ready = std::max(ready, sb.v_ready[r]);
  };
  need_x(use.reads_rs1, instr.rs1);
  need_x(use.reads_rs2 && !iprime, instr.rs2);
  need_v(use.reads_vrs1, instr.vrs1);
  need_v(use.reads_vrs2 && iprime, instr.vrs2);
  need_v(use.reads_vrd1, instr.vrd1);
  // Destinations too, so writebacks to one register stay in program order.
  need_x(use.writes_rd, instr.rd);
  need_v(use.writes_vrd1, instr.vrd1);
  need_v(use.writes_vrd2 && iprime, instr.vrd2);
  if (ready > now) return {IssueStatus::StallData, ready, 0, *handle};
  if (desc.blocking && busy_until_[*handle] > now)
    return {IssueStatus::StallStructural, busy_until_[*handle], 0, *handle};

  CustomInputs in;
  in.lanes = lanes();
  in.rs1 = regs.x[instr.rs1];
  if (!iprime) in.rs2 = regs.x[instr.rs2];
  in.vrs1 = regs.v.read(instr.vrs1);
  if (iprime) in.vrs2 = regs.v.read(instr.vrs2);
  if (use.reads_vrd1) in.vrd1_src = regs.v.read(instr.vrd1);

  CustomOutputs out;
  desc.semantics(in, out, desc.state);

  unsigned latency = desc.latency_cycles;
  if (out.mem) {
    if (!mem) throw std::logic_error(desc.mnemonic + " needs a memory port");
    std::array<uint8_t, kMaxVlenBits / 8> bytes{};
    const std::span<uint8_t> view(bytes.data(), vlen_bits_ / 8);
    if (out.mem->kind == MemRequest::Kind::Store) std::memcpy(bytes.data(), out.mem->data.data(), view.size());
    latency = std::max(latency, mem->vector_access(*out.mem, view, now));
    if (out.mem->kind == MemRequest::Kind::Load) std::memcpy(out.vrd1.data(), bytes.data(), view.size());
  }

  PipelineSlot slot;
  slot.seq = next_seq_++;
  slot.handle = *handle;
  slot.issued_at = now;
  slot.completes_at = now + latency;
  slot.rd = instr.rd;
  slot.vrd1 = instr.vrd1;
  slot.vrd2 = instr.vrd2;
  slot.write_rd = use.writes_rd && instr.rd != 0;
  slot.write_vrd1 = use.writes_vrd1 && instr.vrd1 != 0;
  slot.write_vrd2 = use.writes_vrd2 && iprime && instr.vrd2 != 0;
  slot.rd_value = out.rd;
  slot.vrd1_value = out.vrd1;
  slot.vrd2_value = out.vrd2;
  if (slot.write_rd) sb.x_ready[slot.rd] = slot.completes_at;
  if (slot.write_vrd1) sb.v_ready[slot.vrd1] = slot.completes_at;
  if (slot.write_vrd2) sb.v_ready[slot.vrd2] = slot.completes_at;
  if (desc.blocking) busy_until_[*handle] = slot.completes_at;

  earliest_ = std::min(earliest_, slot.completes_at);
  slots_.push_back(slot);
  return {IssueStatus::Accepted, 0, slot.completes_at, *handle};
}

void VectorUnit::write_back(const PipelineSlot& slot, RegisterFiles& regs) {
  if (slot.write_rd) regs.write_x(slot.rd, slot.rd_value);
  if (slot.write_vrd1) regs.v.write(slot.vrd1, slot.vrd1_value);
  if (slot.write_vrd2) regs.v.write(slot.vrd2, slot.vrd2_value);
}

std::vector<Retirement> VectorUnit::tick(uint64_t now, RegisterFiles& regs) {
  std::vector<Retirement> retired;
  if (now < earliest_) return retired;
  std::erase_if(slots_, [&](const PipelineSlot& s) {
    if (s.completes_at != now) return false;
    write_back(s, regs);
    retired.push_back({s.seq, s.handle, s.issued_at, s.completes_at});
    return true;
  });
  earliest_ = UINT64_MAX;
  for (const auto& s : slots_) earliest_ = std::min(earliest_, s.completes_at);
  return retired;
}

void VectorUnit::retire_through(uint64_t now, RegisterFiles& regs, std::vector<Retirement>* out) {
  while (earliest_ <= now) {
    auto it = slots_.end();
    for (auto s = slots_.begin(); s != slots_.end(); ++s)
      if (it == slots_.end() || s->completes_at < it->completes_at) it = s;
    // Ties keep issue order because the scan is in issue order and strict.
    write_back(*it, regs);
    if (out) out->push_back({it->seq, it->handle, it->issued_at, it->completes_at});
    slots_.erase(it);
    earliest_ = UINT64_MAX;
    for (const auto& s : slots_) earliest_ = std::min(earliest_, s.completes_at);
  }
}

uint64_t VectorUnit::drain_cycle() const {
  uint64_t last = 0;
  for (const auto& s : slots_) last = std::max(last, s.completes_at);
  return last;
}

}  // namespace vexsim
