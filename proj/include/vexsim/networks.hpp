#pragma once

// Data-independent compare-and-swap networks and the log-depth scan used by
// the built-in SIMD instructions.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vexsim {

class InvalidWidth : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CasNetwork {
  using Pair = std::pair<uint16_t, uint16_t>;  // (lo, hi): min goes to lo, max to hi

  unsigned n = 0;
  std::vector<std::vector<Pair>> layers;

  std::size_t depth() const { return layers.size(); }

  /// Every pair has lo < hi < n and no index repeats inside a layer.
  bool well_formed() const;
};

/// Bitonic sorter, ascending. depth = log2(n)(log2(n)+1)/2.
CasNetwork gen_sort_network(unsigned n);

/// Merges two ascending halves of an n-wide input. A leading stage pairs
/// element i with element n-1-i, which leaves the n/2 smallest keys in the
/// lower half and each half bitonic; a bitonic merge cascade of log2(n)
/// layers then sorts both halves. depth = log2(n) + 1.
CasNetwork gen_merge_network(unsigned n);

template <typename T>
void apply_cas_network(const CasNetwork& net, std::span<T> values) {
  if (values.size() != net.n) throw InvalidWidth("network width does not match input");
  for (const auto& layer : net.layers)
    for (auto [lo, hi] : layer)
      if (values[hi] < values[lo]) std::swap(values[lo], values[hi]);
}

/// Number of stages of the pipelined scan: log2(lanes) shift-add steps plus
/// the carry stage.
unsigned scan_stage_count(unsigned lanes);

/// Inclusive prefix sum of `lanes` (in place, wrapping 32-bit) offset by
/// `carry`. Returns the new carry (the last output lane).
uint32_t psum_exec(std::span<uint32_t> lanes, uint32_t carry);

// 0-1 principle checks. The parallel versions split the input space across
// OpenMP threads; the serial ones are the reference they are tested against.

/// True iff `net` sorts all 2^n binary inputs. Requires n <= 24.
bool sorts_all_binary(const CasNetwork& net);
bool sorts_all_binary_serial(const CasNetwork& net);

/// True iff `net` sorts every input whose two halves are each sorted
/// binary sequences ((n/2+1)^2 cases).
bool merges_all_sorted_binary_halves(const CasNetwork& net);
bool merges_all_sorted_binary_halves_serial(const CasNetwork& net);

}  // namespace vexsim
