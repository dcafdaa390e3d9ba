#include "vexsim/networks.hpp"

#include <bit>
#include <string>

namespace vexsim {

namespace {

void require_pow2(unsigned n, unsigned min) {
  if (n < min || !std::has_single_bit(n))
    throw InvalidWidth("network width must be a power of two >= " + std::to_string(min) +
                       ", got " + std::to_string(n));
}

// Half-cleaner cascade: for span = start, start/2, ..., 1 compare (i, i+span)
// inside blocks of 2*span.
void append_cleaners(CasNetwork& net, unsigned start) {
  for (unsigned span = start; span >= 1; span /= 2) {
    std::vector<CasNetwork::Pair> layer;
    for (unsigned block = 0; block < net.n; block += 2 * span)
      for (unsigned i = block; i < block + span; ++i)
        layer.emplace_back(static_cast<uint16_t>(i), static_cast<uint16_t>(i + span));
    net.layers.push_back(std::move(layer));
  }
}

// Applies `net` to the bits of `x` (bit i = element i); min moves to lo.
uint32_t apply_bits(const CasNetwork& net, uint32_t x) {
  for (const auto& layer : net.layers)
    for (auto [lo, hi] : layer) {
      const uint32_t a = (x >> lo) & 1u;
      const uint32_t b = (x >> hi) & 1u;
      if (a > b) x ^= (1u << lo) | (1u << hi);
    }
  return x;
}

// Sorted ascending binary vector with `ones` trailing ones occupying bits
// [n-ones, n).
bool bits_sorted(uint32_t x, unsigned n) {
  const unsigned ones = static_cast<unsigned>(std::popcount(x));
  const uint32_t full = n == 32 ? ~0u : ((1u << n) - 1);
  const uint32_t want = ones == 0 ? 0u : (full & ~((1u << (n - ones)) - 1u));
  return x == want;
}

uint32_t sorted_half(unsigned zeros, unsigned half) {
  // Bits [zeros, half) set.
  const uint32_t all = (1u << half) - 1u;
  return all & ~((1u << zeros) - 1u);
}

}  // namespace

bool CasNetwork::well_formed() const {
  for (const auto& layer : layers) {
    std::vector<bool> used(n, false);
    for (auto [lo, hi] : layer) {
      if (lo >= hi || hi >= n || used[lo] || used[hi]) return false;
      used[lo] = used[hi] = true;
    }
  }
  return true;
}

CasNetwork gen_sort_network(unsigned n) {
  require_pow2(n, 2);
  CasNetwork net;
  net.n = n;
  for (unsigned k = 2; k <= n; k *= 2) {
    // Flip stage: compare mirrored positions inside each block of k, so every
    // comparator keeps the minimum at the lower index.
    std::vector<CasNetwork::Pair> flip;
    for (unsigned block = 0; block < n; block += k)
      for (unsigned i = 0; i < k / 2; ++i)
        flip.emplace_back(static_cast<uint16_t>(block + i), static_cast<uint16_t>(block + k - 1 - i));
    net.layers.push_back(std::move(flip));
    if (k >= 4) append_cleaners(net, k / 4);
  }
  return net;
}

CasNetwork gen_merge_network(unsigned n) {
  require_pow2(n, 4);
  CasNetwork net;
  net.n = n;
  std::vector<CasNetwork::Pair> lead;
  for (unsigned i = 0; i < n / 2; ++i)
    lead.emplace_back(static_cast<uint16_t>(i), static_cast<uint16_t>(n - 1 - i));
  net.layers.push_back(std::move(lead));
  append_cleaners(net, n / 2);
  return net;
}

unsigned scan_stage_count(unsigned lanes) {
  require_pow2(lanes, 1);
  return static_cast<unsigned>(std::countr_zero(lanes)) + 1;
}

uint32_t psum_exec(std::span<uint32_t> lanes, uint32_t carry) {
  const auto n = static_cast<unsigned>(lanes.size());
  require_pow2(n, 1);
  // Hillis-Steele: step d adds lane i-d into lane i. Walking i downwards keeps
  // the reads on the previous step's values.
  for (unsigned d = 1; d < n; d *= 2)
    for (unsigned i = n - 1; i >= d; --i) lanes[i] += lanes[i - d];
  for (auto& v : lanes) v += carry;
  return lanes[n - 1];
}

bool sorts_all_binary_serial(const CasNetwork& net) {
  if (net.n > 24) throw InvalidWidth("exhaustive check limited to n <= 24");
  const uint64_t cases = uint64_t{1} << net.n;
  for (uint64_t x = 0; x < cases; ++x)
    if (!bits_sorted(apply_bits(net, static_cast<uint32_t>(x)), net.n)) return false;
  return true;
}

bool sorts_all_binary(const CasNetwork& net) {
  if (net.n > 24) throw InvalidWidth("exhaustive check limited to n <= 24");
  const int64_t cases = int64_t{1} << net.n;
  int64_t failures = 0;
#pragma omp parallel for reduction(+ : failures) schedule(static)
  for (int64_t x = 0; x < cases; ++x)
    if (!bits_sorted(apply_bits(net, static_cast<uint32_t>(x)), net.n)) ++failures;
  return failures == 0;
}

bool merges_all_sorted_binary_halves_serial(const CasNetwork& net) {
  const unsigned half = net.n / 2;
  if (net.n > 32 || net.n < 2) throw InvalidWidth("merge check needs 2 <= n <= 32");
  for (unsigned za = 0; za <= half; ++za)
    for (unsigned zb = 0; zb <= half; ++zb) {
      const uint32_t x = sorted_half(za, half) | (sorted_half(zb, half) << half);
      if (!bits_sorted(apply_bits(net, x), net.n)) return false;
    }
  return true;
}

bool merges_all_sorted_binary_halves(const CasNetwork& net) {
  const unsigned half = net.n / 2;
  if (net.n > 32 || net.n < 2) throw InvalidWidth("merge check needs 2 <= n <= 32");
  const int cases = static_cast<int>((half + 1) * (half + 1));
  int failures = 0;
#pragma omp parallel for reduction(+ : failures) schedule(static)
  for (int c = 0; c < cases; ++c) {
    const unsigned za = static_cast<unsigned>(c) / (half + 1);
    const unsigned zb = static_cast<unsigned>(c) % (half + 1);
    const uint32_t x = sorted_half(za, half) | (sorted_half(zb, half) << half);
    if (!bits_sorted(apply_bits(net, x), net.n)) ++failures;
  }
  return failures == 0;
}

}  // namespace vexsim
