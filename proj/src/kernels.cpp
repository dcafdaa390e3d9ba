#include "vexsim/kernels.hpp"

#include <stdexcept>
#include <string>

namespace vexsim {

namespace {

// Every kernel saves its arguments, reads the cycle counter into s10/s11,
// runs, reads it again into t5/t6 and exits with a0 = 0.
constexpr std::string_view kPrologue = R"(
_start:
    mv s0, a0
    mv s1, a1
    mv s2, a2
    mv s3, a3
    mv s4, a4
)";

constexpr std::string_view kStartClock = R"(
    li a7, 1000
    ecall
    mv s10, a0
    mv s11, a1
)";

constexpr std::string_view kEpilogue = R"(
done:
    li a7, 1000
    ecall
    mv t5, a0
    mv t6, a1
    li a0, 0
    li a7, 93
    ecall
)";

// a0 = src, a1 = dst, a2 = bytes (multiple of @VB@)
constexpr std::string_view kMemcpy = R"(
    li t0, 0
    li t2, @VB2@
pair:
    sub t3, s2, t0
    bltu t3, t2, tail
    addi t1, t0, @VB@
    c0_lv v1, v0, x0, s0, t0
    c0_lv v2, v0, x0, s0, t1
    mv t4, t0
    addi t0, t0, @VB2@
    c0_sv v1, v0, x0, s1, t4
    c0_sv v2, v0, x0, s1, t1
    j pair
tail:
    beq t0, s2, done
    c0_lv v1, v0, x0, s0, t0
    c0_sv v1, v0, x0, s1, t0
    addi t0, t0, @VB@
    j tail
)";

// a0 = a, a1 = b, a2 = c, a3 = element count (multiple of 8), a4 = scalar.
// Arrays are initialised in-program: a[i] = i, b[i] = 2i + 1, c[i] = 0.
constexpr std::string_view kStreamInit = R"(
    mv t0, s0
    mv t1, s1
    mv t2, s2
    li t3, 0
init:
    beq t3, s3, init_done
    slli t4, t3, 1
    addi t4, t4, 1
    sw t3, 0(t0)
    sw t4, 0(t1)
    sw x0, 0(t2)
    addi t0, t0, 4
    addi t1, t1, 4
    addi t2, t2, 4
    addi t3, t3, 1
    j init
init_done:
    slli s5, s3, 2
    add s5, s5, s0
)";

// Unrolled by 8; all loads of a group issue before the dependent stores.
constexpr std::string_view kStreamCopy = R"(
loop:
    beq s0, s5, done
    lw t0, 0(s0)
    lw t1, 4(s0)
    lw t2, 8(s0)
    lw t3, 12(s0)
    lw t4, 16(s0)
    lw a0, 20(s0)
    lw a1, 24(s0)
    lw a2, 28(s0)
    sw t0, 0(s2)
    sw t1, 4(s2)
    sw t2, 8(s2)
    sw t3, 12(s2)
    sw t4, 16(s2)
    sw a0, 20(s2)
    sw a1, 24(s2)
    sw a2, 28(s2)
    addi s0, s0, 32
    addi s2, s2, 32
    j loop
)";

constexpr std::string_view kStreamScale = R"(
loop:
    beq s0, s5, done
    lw t0, 0(s0)
    lw t1, 4(s0)
    lw t2, 8(s0)
    lw t3, 12(s0)
    lw t4, 16(s0)
    lw a0, 20(s0)
    lw a1, 24(s0)
    lw a2, 28(s0)
    mul t0, t0, s4
    mul t1, t1, s4
    mul t2, t2, s4
    mul t3, t3, s4
    mul t4, t4, s4
    mul a0, a0, s4
    mul a1, a1, s4
    mul a2, a2, s4
    sw t0, 0(s2)
    sw t1, 4(s2)
    sw t2, 8(s2)
    sw t3, 12(s2)
    sw t4, 16(s2)
    sw a0, 20(s2)
    sw a1, 24(s2)
    sw a2, 28(s2)
    addi s0, s0, 32
    addi s2, s2, 32
    j loop
)";

// c = a + b and c = a + s*b, four elements per half-iteration.
constexpr std::string_view kStreamAddHalf = R"(
    lw t0, @O0@(s0)
    lw t1, @O1@(s0)
    lw t2, @O2@(s0)
    lw t3, @O3@(s0)
    lw t4, @O0@(s1)
    lw a0, @O1@(s1)
    lw a1, @O2@(s1)
    lw a2, @O3@(s1)
@SCALE@
    add t0, t0, t4
    add t1, t1, a0
    add t2, t2, a1
    add t3, t3, a2
    sw t0, @O0@(s2)
    sw t1, @O1@(s2)
    sw t2, @O2@(s2)
    sw t3, @O3@(s2)
)";

constexpr std::string_view kTriadScale = R"(
    mul t4, t4, s4
    mul a0, a0, s4
    mul a1, a1, s4
    mul a2, a2, s4
)";

// a0 = data, a1 = scratch of equal size, a2 = element count (power of two,
// at least 2 * lanes). The sorted result's address ends up in s9.
constexpr std::string_view kSortSimd = R"(
    slli s5, s2, 2          # total bytes
    li s6, @VB@
    li t0, 0
chunk:
    c0_lv v1, v0, x0, s0, t0
    add t1, t0, s6
    c0_lv v2, v0, x0, s0, t1
    c2_sort v1, v0, v1
    c2_sort v2, v0, v2
    c1_merge v1, v2, v1, v2
    c0_sv v1, v0, x0, s0, t0
    c0_sv v2, v0, x0, s0, t1
    add t0, t1, s6
    bltu t0, s5, chunk

    mv s7, s0               # source of the current pass
    mv s8, s1               # destination
    slli s9, s6, 1          # run length in bytes
pass:
    bgeu s9, s5, sorted
    li t0, 0
pair:
    add a0, s7, t0          # a cursor
    add a1, a0, s9          # a end = b cursor
    add a3, a1, s9          # b end
    mv a2, a1
    add a4, s8, t0          # output cursor
    c0_lv v1, v0, x0, a0, x0
    c0_lv v2, v0, x0, a2, x0
    add a0, a0, s6
    add a2, a2, s6
    c1_merge v1, v2, v1, v2
    c0_sv v1, v0, x0, a4, x0
    add a4, a4, s6
step:
    beq a0, a1, a_empty
    beq a2, a3, take_a
    lw t3, 0(a0)
    lw t4, 0(a2)
    blt t4, t3, take_b
take_a:
    c0_lv v1, v0, x0, a0, x0
    add a0, a0, s6
    j merge
a_empty:
    beq a2, a3, flush
take_b:
    c0_lv v1, v0, x0, a2, x0
    add a2, a2, s6
merge:
    c1_merge v1, v2, v1, v2
    c0_sv v1, v0, x0, a4, x0
    add a4, a4, s6
    j step
flush:
    c0_sv v2, v0, x0, a4, x0
    add t0, t0, s9
    add t0, t0, s9
    bltu t0, s5, pair
    mv t1, s7
    mv s7, s8
    mv s8, t1
    slli s9, s9, 1
    j pass
sorted:
    mv s9, s7
)";

// Bottom-up mergesort with the same interface as the vector version.
constexpr std::string_view kSortScalar = R"(
    slli s5, s2, 2
    mv s7, s0
    mv s8, s1
    li s6, 4                # run length in bytes
pass:
    bgeu s6, s5, sorted
    li t0, 0
pair:
    add a0, s7, t0          # left cursor
    add a1, a0, s6          # left end = right cursor
    add a3, a1, s6          # right end
    mv a2, a1
    add a4, s8, t0
both:
    beq a0, a1, rest_b
    beq a2, a3, rest_a
    lw t3, 0(a0)
    lw t4, 0(a2)
    blt t4, t3, from_b
    sw t3, 0(a4)
    addi a0, a0, 4
    addi a4, a4, 4
    j both
from_b:
    sw t4, 0(a4)
    addi a2, a2, 4
    addi a4, a4, 4
    j both
rest_a:
    beq a0, a1, next
    lw t3, 0(a0)
    sw t3, 0(a4)
    addi a0, a0, 4
    addi a4, a4, 4
    j rest_a
rest_b:
    beq a2, a3, next
    lw t4, 0(a2)
    sw t4, 0(a4)
    addi a2, a2, 4
    addi a4, a4, 4
    j rest_b
next:
    add t0, t0, s6
    add t0, t0, s6
    bltu t0, s5, pair
    mv t1, s7
    mv s7, s8
    mv s8, t1
    slli s6, s6, 1
    j pass
sorted:
    mv s9, s7
)";

// a0 = src, a1 = dst, a2 = element count (multiple of 2 * lanes).
constexpr std::string_view kPsumSimd = R"(
    slli s5, s2, 2
    li s6, @VB@
    slli s7, s6, 1
    c0_lv v1, v0, x0, s0, x0
    c0_lv v2, v0, x0, s0, s6
    c3_psum_init v1, v0, v1
    c3_psum v2, v0, v2
    c0_sv v1, v0, x0, s1, x0
    c0_sv v2, v0, x0, s1, s6
    mv t0, s7
loop:
    bgeu t0, s5, done
    add t1, t0, s6
    c0_lv v1, v0, x0, s0, t0
    c0_lv v2, v0, x0, s0, t1
    c3_psum v1, v0, v1
    c3_psum v2, v0, v2
    c0_sv v1, v0, x0, s1, t0
    c0_sv v2, v0, x0, s1, t1
    add t0, t0, s7
    j loop
)";

constexpr std::string_view kPsumScalar = R"(
    slli s5, s2, 2
    add s5, s5, s0
    li t0, 0
loop:
    beq s0, s5, done
    lw t1, 0(s0)
    lw t2, 4(s0)
    lw t3, 8(s0)
    lw t4, 12(s0)
    add t0, t0, t1
    sw t0, 0(s1)
    add t0, t0, t2
    sw t0, 4(s1)
    add t0, t0, t3
    sw t0, 8(s1)
    add t0, t0, t4
    sw t0, 12(s1)
    addi s0, s0, 16
    addi s1, s1, 16
    j loop
)";

std::string substitute(std::string text, std::string_view key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
    text.replace(pos, key.size(), value);
  return text;
}

std::string stream_add(bool triad) {
  std::string body = "loop:\n    beq s0, s5, done\n";
  for (int half = 0; half < 2; ++half) {
    std::string h(kStreamAddHalf);
    for (int i = 0; i < 4; ++i)
      h = substitute(h, "@O" + std::to_string(i) + "@", std::to_string(16 * half + 4 * i));
    body += substitute(h, "@SCALE@", triad ? std::string(kTriadScale) : "");
  }
  body += "    addi s0, s0, 32\n    addi s1, s1, 32\n    addi s2, s2, 32\n    j loop\n";
  return body;
}

}  // namespace

std::string kernel_source(std::string_view bench, unsigned vlen_bits) {
  std::string body;
  bool stream = false;
  if (bench == "memcpy") body = kMemcpy;
  else if (bench == "stream_copy") body = kStreamCopy, stream = true;
  else if (bench == "stream_scale") body = kStreamScale, stream = true;
  else if (bench == "stream_add") body = stream_add(false), stream = true;
  else if (bench == "stream_triad") body = stream_add(true), stream = true;
  else if (bench == "sort_simd") body = kSortSimd;
  else if (bench == "sort_scalar") body = kSortScalar;
  else if (bench == "psum_simd") body = kPsumSimd;
  else if (bench == "psum_scalar") body = kPsumScalar;
  else throw std::invalid_argument("unknown benchmark '" + std::string(bench) + "'");

  std::string src(kPrologue);
  if (stream) src += kStreamInit;
  src += kStartClock;
  src += body;
  src += kEpilogue;
  src = substitute(src, "@VB2@", std::to_string(vlen_bits / 4));
  return substitute(src, "@VB@", std::to_string(vlen_bits / 8));
}

}  // namespace vexsim
