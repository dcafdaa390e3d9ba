#include <doctest.h>

#include <algorithm>
#include <bit>
#include <random>
#include <set>
#include <vector>

#include "vexsim/networks.hpp"

using namespace vexsim;

namespace {

// Exhaustive 0-1 check written independently of the library's checker.
bool oracle_sorts_binary(const CasNetwork& net) {
  std::vector<int> v(net.n);
  for (uint32_t m = 0; m < (1u << net.n); ++m) {
    for (unsigned i = 0; i < net.n; ++i) v[i] = (m >> i) & 1;
    apply_cas_network<int>(net, v);
    if (!std::is_sorted(v.begin(), v.end())) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("networks") {

TEST_CASE("sort network depth and structure") {
  for (unsigned n : {2u, 4u, 8u, 16u, 32u}) {
    const CasNetwork net = gen_sort_network(n);
    const unsigned k = std::bit_width(n) - 1;
    CHECK(net.n == n);
    CHECK(net.depth() == k * (k + 1) / 2);
    CHECK(net.well_formed());
  }
}

TEST_CASE("merge network depth and structure") {
  for (unsigned n : {4u, 8u, 16u, 32u}) {
    const CasNetwork net = gen_merge_network(n);
    CHECK(net.depth() == std::bit_width(n));  // log2(n) + 1
    CHECK(net.well_formed());
  }
}

TEST_CASE("invalid widths") {
  CHECK_THROWS_AS(gen_sort_network(6), InvalidWidth);
  CHECK_THROWS_AS(gen_sort_network(0), InvalidWidth);
  CHECK_THROWS_AS(gen_merge_network(3), InvalidWidth);
  std::vector<int> v(3);
  CHECK_THROWS_AS(apply_cas_network<int>(gen_sort_network(4), v), InvalidWidth);
}

TEST_CASE("sort networks satisfy the 0-1 principle") {
  for (unsigned n : {2u, 4u, 8u, 16u}) {
    const CasNetwork net = gen_sort_network(n);
    CHECK(oracle_sorts_binary(net));
    CHECK(sorts_all_binary(net));
    CHECK(sorts_all_binary_serial(net));
  }
}

TEST_CASE("merge networks merge all sorted binary halves") {
  for (unsigned n : {4u, 8u, 16u, 32u}) {
    const CasNetwork net = gen_merge_network(n);
    CHECK(merges_all_sorted_binary_halves(net));
    CHECK(merges_all_sorted_binary_halves_serial(net));
    // Independent enumeration: i ones in the lower half, j in the upper.
    const unsigned h = n / 2;
    for (unsigned i = 0; i <= h; ++i)
      for (unsigned j = 0; j <= h; ++j) {
        std::vector<int> v(n, 0);
        for (unsigned t = h - i; t < h; ++t) v[t] = 1;
        for (unsigned t = n - j; t < n; ++t) v[t] = 1;
        apply_cas_network<int>(net, v);
        REQUIRE(std::is_sorted(v.begin(), v.end()));
      }
  }
}

TEST_CASE("checkers reject a broken network") {
  CasNetwork net = gen_sort_network(8);
  net.layers.back().pop_back();
  CHECK_FALSE(oracle_sorts_binary(net));
  CHECK_FALSE(sorts_all_binary(net));
  CHECK_FALSE(sorts_all_binary_serial(net));

  CasNetwork m = gen_merge_network(8);
  m.layers.erase(m.layers.begin());
  CHECK_FALSE(merges_all_sorted_binary_halves(m));
  CHECK_FALSE(merges_all_sorted_binary_halves_serial(m));
}

TEST_CASE("sort network sorts random signed keys") {
  std::mt19937_64 rng(5);
  for (unsigned n : {4u, 8u, 16u, 32u})
    for (int rep = 0; rep < 500; ++rep) {
      std::vector<int32_t> v(n);
      for (auto& x : v) x = static_cast<int32_t>(rng());
      auto want = v;
      std::sort(want.begin(), want.end());
      apply_cas_network<int32_t>(gen_sort_network(n), v);
      REQUIRE(v == want);
    }
}

TEST_CASE("merge network output is a sorted permutation of two sorted halves") {
  std::mt19937_64 rng(6);
  for (unsigned n : {4u, 8u, 16u, 32u})
    for (int rep = 0; rep < 500; ++rep) {
      std::vector<int32_t> v(n);
      for (auto& x : v) x = static_cast<int32_t>(rng() % 64) - 32;
      std::sort(v.begin(), v.begin() + n / 2);
      std::sort(v.begin() + n / 2, v.end());
      std::multiset<int32_t> before(v.begin(), v.end());
      apply_cas_network<int32_t>(gen_merge_network(n), v);
      REQUIRE(std::is_sorted(v.begin(), v.end()));
      REQUIRE(std::multiset<int32_t>(v.begin(), v.end()) == before);
    }
}

TEST_CASE("psum matches a serial scan with carry") {
  std::mt19937_64 rng(8);
  for (unsigned lanes : {4u, 8u, 16u, 32u}) {
    CHECK(scan_stage_count(lanes) == std::bit_width(lanes));
    uint32_t carry = 0, want_carry = 0;
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<uint32_t> v(lanes);
      for (auto& x : v) x = static_cast<uint32_t>(rng());
      std::vector<uint32_t> want(lanes);
      for (unsigned i = 0; i < lanes; ++i) want[i] = want_carry += v[i];
      carry = psum_exec(v, carry);
      REQUIRE(v == want);
      REQUIRE(carry == want_carry);
    }
  }
}

TEST_CASE("psum of zeros is zero") {
  std::vector<uint32_t> v(8, 0);
  CHECK(psum_exec(v, 0) == 0);
  CHECK(std::all_of(v.begin(), v.end(), [](uint32_t x) { return x == 0; }));
}

}  // TEST_SUITE
