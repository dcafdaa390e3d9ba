#include <doctest.h>

#include <algorithm>
#include <climits>
#include <cstring>

#include "support/sim.hpp"
#include "vexsim/vector_unit.hpp"

using namespace vexsim;
using testsupport::run;
using testsupport::traced;

namespace {

const TraceEntry& at(const Core& core, const Image& img, const std::string& label) {
  const uint32_t pc = img.symbols.at(label);
  const auto& tr = core.trace();
  auto it = std::find_if(tr.rbegin(), tr.rend(), [&](const TraceEntry& e) { return e.pc == pc; });
  REQUIRE(it != tr.rend());
  return *it;
}

struct Traced {
  Image img;
  std::unique_ptr<Core> core;
};

Traced run_traced(const std::string& src, SimConfig cfg = traced()) {
  Traced t{assemble(src), std::make_unique<Core>(cfg)};
  t.core->load_image(t.img);
  t.core->run(1'000'000);
  return t;
}

constexpr const char* kExit = "    li a0, 0\n    li a7, 93\n    ecall\n";

}  // namespace

TEST_SUITE("core") {

TEST_CASE("exit-only program") {
  auto c = run("li a7, 93\necall\n");
  CHECK(c->stats().stop == StopReason::Exited);
  CHECK(c->stats().retired == 2);
  CHECK(c->stats().system == 1);
  CHECK(c->stats().alu == 1);
}

TEST_CASE("exit code and x0") {
  auto c = run("addi x0, x0, 5\nli a0, 42\nli a7, 93\necall\n");
  CHECK(c->reg(0) == 0);
  CHECK(c->stats().exit_code == 42);
}

TEST_CASE("dependent adds issue back to back") {
  auto t = run_traced(std::string("    li t0, 1\n    .align 5\nfirst:\n    add t1, t0, t0\nsecond:\n    add t2, t1, t1\n") + kExit);
  const auto& a = at(*t.core, t.img, "first");
  const auto& b = at(*t.core, t.img, "second");
  CHECK(b.issue == a.issue + 1);
  CHECK(b.complete - a.issue == 2);
  CHECK(t.core->reg(7) == 4);
}

TEST_CASE("load-use on a DL1 hit stalls two cycles") {
  const std::string src = R"(
    la s0, buf
    lw t0, 0(s0)
    .align 5
ld:
    lw t1, 4(s0)
use:
    add t2, t1, t1
)" + std::string(kExit) + ".data\nbuf: .word 1, 21\n";
  auto t = run_traced(src);
  CHECK(at(*t.core, t.img, "use").issue - at(*t.core, t.img, "ld").issue == 3);
  CHECK(t.core->stats().stall_load_use == 2);
  CHECK(t.core->reg(7) == 42);
}

TEST_CASE("two independent instructions hide the load latency") {
  const std::string src = R"(
    la s0, buf
    lw t0, 0(s0)
    .align 5
ld:
    lw t1, 4(s0)
    addi a1, a1, 1
    addi a2, a2, 1
use:
    add t2, t1, t1
)" + std::string(kExit) + ".data\nbuf: .word 1, 21\n";
  auto t = run_traced(src);
  CHECK(at(*t.core, t.img, "use").issue - at(*t.core, t.img, "ld").issue == 3);
  CHECK(t.core->stats().stall_load_use == 0);
}

TEST_CASE("cycles equal consumed cycles plus stalls") {
  const std::string src = R"(
    la s0, buf
    li t0, 0
    li t1, 64
loop:
    lw t2, 0(s0)
    add t3, t3, t2
    sw t3, 256(s0)
    div t4, t3, t1
    addi s0, s0, 4
    addi t0, t0, 1
    blt t0, t1, loop
)" + std::string(kExit) + ".data\nbuf: .space 1024\n";
  auto c = run(src);
  const ExecStats& s = c->stats();
  CHECK(s.stop == StopReason::Exited);
  CHECK(s.cycles == s.consumed + s.stalls());
  CHECK(s.muldiv == 64);
  CHECK(s.consumed >= 64 * 32);
}

TEST_CASE("division and remainder edge cases") {
  const std::string src = R"(
    li t0, 7
    li t1, 0
    div a1, t0, t1
    divu a2, t0, t1
    rem a3, t0, t1
    remu a4, t0, t1
    li t2, 0x80000000
    li t3, -1
    div a5, t2, t3
    rem a6, t2, t3
    li t4, -7
    li t5, 2
    div s2, t4, t5
    rem s3, t4, t5
    mulh s4, t2, t2
    mulhsu s5, t3, t3
    mulhu s6, t3, t3
)" + std::string(kExit);
  auto c = run(src);
  CHECK(c->reg(11) == 0xffffffffu);
  CHECK(c->reg(12) == 0xffffffffu);
  CHECK(c->reg(13) == 7);
  CHECK(c->reg(14) == 7);
  CHECK(c->reg(15) == 0x80000000u);
  CHECK(c->reg(16) == 0);
  CHECK(static_cast<int32_t>(c->reg(18)) == -3);
  CHECK(static_cast<int32_t>(c->reg(19)) == -1);
  CHECK(c->reg(20) == 0x40000000u);
  CHECK(c->reg(21) == 0xffffffffu);
  CHECK(c->reg(22) == 0xfffffffeu);
}

TEST_CASE("host calls") {
  SUBCASE("write") {
    auto c = run(R"(
    la a1, msg
    li a2, 3
    li a0, 1
    li a7, 64
    ecall
    mv s0, a0
    li a0, 0
    li a7, 93
    ecall
.data
msg: .byte 104, 105, 10
)");
    CHECK(c->output() == "hi\n");
    CHECK(c->reg(8) == 3);
  }
  SUBCASE("cycle counter") {
    auto c = run(std::string("nop\nnop\nli a7, 1000\necall\nmv s0, a0\nmv s1, a1\n") + kExit);
    CHECK(c->reg(8) > 0);
    CHECK(c->reg(8) < c->cycle());
    CHECK(c->reg(9) == 0);
  }
  SUBCASE("unknown selector traps") {
    auto c = run("li a7, 7\necall\n");
    CHECK(c->stats().stop == StopReason::Trapped);
    CHECK(c->stats().trap == TrapKind::IllegalInstruction);
  }
}

TEST_CASE("traps halt the core") {
  auto mis = run("li t0, 2\nlw t1, 0(t0)\n");
  CHECK(mis->stats().trap == TrapKind::Misaligned);
  CHECK(mis->stats().trap_pc == 4);
  auto eb = run("ebreak\n");
  CHECK(eb->stats().trap == TrapKind::Ebreak);
  auto ill = run(".word 0\n");
  CHECK(ill->stats().trap == TrapKind::IllegalInstruction);
  auto oob = run("li t0, -4\nlw t1, 0(t0)\n");
  CHECK(oob->stats().trap == TrapKind::OutOfRange);
  CHECK(oob->halted());
  CHECK(oob->step().trap);
}

TEST_CASE("cycle budget") {
  auto c = run("loop: j loop\n", {}, 1000);
  CHECK(c->stats().stop == StopReason::MaxCyclesExceeded);
  CHECK(c->cycle() == 1000);
}

TEST_CASE("sorting eight keys is one instruction and six pipeline cycles") {
  const std::string src = R"(
    la s0, keys
    c0_lv v1, v0, x0, s0, x0
    .align 5
sort:
    c2_sort v2, v0, v1
    c0_sv v2, v0, x0, s0, x0
)" + std::string(kExit) + ".data\nkeys: .word 5, -1, 9, 3, 3, 0, -8, 100\n";
  auto t = run_traced(src);
  const auto& e = at(*t.core, t.img, "sort");
  CHECK(e.complete - e.issue == 6);
  CHECK(t.core->stats().custom.at("c2_sort") == 1);
  const uint32_t base = t.img.symbols.at("keys");
  const int32_t want[] = {-8, -1, 0, 3, 3, 5, 9, 100};
  for (unsigned i = 0; i < 8; ++i) CHECK(static_cast<int32_t>(t.core->peek32(base + 4 * i)) == want[i]);
}

TEST_CASE("sort latency follows the vector width") {
  for (unsigned vlen : {128u, 256u, 512u}) {
    SimConfig cfg = traced();
    cfg.vlen_bits = vlen;
    cfg.cache.dl1_block_bits = cfg.cache.il1_block_bits = vlen;
    auto t = run_traced(std::string(".align 6\nsort:\n    c2_sort v2, v0, v1\n") + kExit, cfg);
    const auto& e = at(*t.core, t.img, "sort");
    CHECK(e.complete - e.issue == sort_latency(vlen));
  }
}

TEST_CASE("reading a vector register in flight stalls") {
  auto t = run_traced(std::string(R"(
    .align 5
s1:
    c2_sort v2, v0, v1
s2:
    c2_sort v3, v0, v2
)") + kExit);
  CHECK(at(*t.core, t.img, "s2").issue - at(*t.core, t.img, "s1").issue == 6);
  CHECK(t.core->stats().stall_vector_data == 5);
}

TEST_CASE("no architectural read of a pending register") {
  SimConfig cfg;
  cfg.check_scoreboard = true;
  auto c = run(R"(
    la s0, buf
    li t0, 0
    li t1, 32
loop:
    lw t2, 0(s0)
    lw t3, 4(s0)
    add t4, t2, t3
    sw t4, 0(s0)
    addi t0, t0, 1
    blt t0, t1, loop
    li a0, 0
    li a7, 93
    ecall
.data
buf: .word 1, 2
)", cfg);
  CHECK(c->stats().stop == StopReason::Exited);
  CHECK(c->stats().scoreboard_violations == 0);
}

TEST_CASE("runs are deterministic") {
  const std::string src = R"(
    la s0, buf
    li t0, 0
    li t1, 500
loop:
    slli t2, t0, 6
    add t2, t2, s0
    sw t0, 0(t2)
    lw t3, 0(t2)
    add a1, a1, t3
    addi t0, t0, 1
    blt t0, t1, loop
    li a0, 0
    li a7, 93
    ecall
.data
buf: .space 32768
)";
  auto a = run(src);
  auto b = run(src);
  CHECK(a->stats() == b->stats());
  CHECK(a->reg(11) == 500 * 499 / 2);
}

TEST_CASE("image must fit in memory") {
  SimConfig cfg;
  cfg.mem_bytes = 1u << 16;
  Core core(cfg);
  Image img;
  img.base = 0xfff0;
  img.bytes.assign(64, 0);
  CHECK_THROWS_AS(core.load_image(img), ConfigError);
}

TEST_CASE("invalid configurations are rejected") {
  SimConfig cfg;
  cfg.vlen_bits = 384;
  CHECK_THROWS_AS(Core{cfg}, ConfigError);
  cfg = SimConfig{};
  cfg.mem_bytes = 1000;
  CHECK_THROWS_AS(Core{cfg}, ConfigError);
}

}  // TEST_SUITE
