#include <doctest.h>

#include <cstring>
#include <random>

#include "support/rv32_ref.hpp"
#include "vexsim/core.hpp"

using namespace vexsim;

TEST_SUITE("oracle") {

TEST_CASE("random programs match the reference interpreter") {
  constexpr uint32_t kMem = 1u << 20;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    const ref::Program prog = ref::random_program(seed, 10000);

    Image img;
    img.bytes.resize(prog.words.size() * 4);
    std::memcpy(img.bytes.data(), prog.words.data(), img.bytes.size());

    std::mt19937_64 rng(seed * 31);
    std::vector<uint8_t> data(prog.data_bytes);
    for (auto& b : data) b = static_cast<uint8_t>(rng());

    SimConfig cfg;
    cfg.mem_bytes = kMem;
    cfg.check_scoreboard = true;
    Core core(cfg);
    core.load_image(img);
    core.poke(prog.data_base, data);
    const ExecStats& st = core.run(100'000'000);

    ref::Machine m(0, kMem);
    std::memcpy(m.mem.data(), img.bytes.data(), img.bytes.size());
    std::memcpy(m.mem.data() + prog.data_base, data.data(), data.size());
    m.x[2] = kMem - 16;
    m.run(1'000'000);

    REQUIRE(m.halted);
    REQUIRE(st.stop == StopReason::Exited);
    CHECK(st.retired == m.retired);
    CHECK(st.scoreboard_violations == 0);
    CHECK(st.cycles == st.consumed + st.stalls());
    CHECK(core.pc() == m.pc);
    for (unsigned r = 0; r < 32; ++r) {
      CAPTURE(r);
      CHECK(core.reg(r) == m.x[r]);
    }
    core.flush();
    std::vector<uint8_t> got(prog.data_bytes);
    core.peek(prog.data_base, got);
    CHECK(std::memcmp(got.data(), m.mem.data() + prog.data_base, got.size()) == 0);
  }
}

}  // TEST_SUITE
