#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>

namespace mmda::instances {

using Label = std::uint32_t;

inline constexpr int kMaxGroundSet = 30;

namespace detail {

struct BinomialTable {
  std::array<std::array<std::uint64_t, kMaxGroundSet + 2>, kMaxGroundSet + 2> c{};
  constexpr BinomialTable() {
    for (int n = 0; n <= kMaxGroundSet + 1; ++n) {
      c[n][0] = 1;
      for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
    }
  }
};

inline constexpr BinomialTable kBinom{};

}  // namespace detail

inline constexpr std::uint64_t small_binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  return detail::kBinom.c[n][k];
}

// Colex rank of a k-subset: sum of C(c_i, i) over its elements c_1 < ... < c_k.
// Numeric order of bitmasks with equal popcount is colex order.
inline std::uint64_t colex_rank(Label s) {
  std::uint64_t r = 0;
  int i = 1;
  while (s) {
    int c = std::countr_zero(s);
    r += small_binomial(c, i);
    ++i;
    s &= s - 1;
  }
  return r;
}

inline Label colex_unrank(std::uint64_t rank, int k) {
  Label s = 0;
  for (int i = k; i >= 1; --i) {
    int c = i - 1;
    while (small_binomial(c + 1, i) <= rank) ++c;
    rank -= small_binomial(c, i);
    s |= Label{1} << c;
  }
  return s;
}

// Next bitmask with the same popcount (Gosper's hack).
inline Label next_same_popcount(Label x) {
  Label c = x & (~x + 1);
  Label r = x + c;
  return (((r ^ x) >> 2) / c) | r;
}

// Scatters the low bits of `bits` onto the set bits of `mask`, in order.
inline Label deposit(Label bits, Label mask) {
  Label out = 0;
  for (Label m = mask; m && bits; m &= m - 1, bits >>= 1)
    if (bits & 1) out |= m & (~m + 1);
  return out;
}

// Calls f(sub) for every size-k subset of `set`, in increasing numeric order.
template <class F>
void for_each_subset_of(Label set, int k, F&& f) {
  int n = std::popcount(set);
  if (k < 0 || k > n) return;
  if (k == 0) {
    f(Label{0});
    return;
  }
  if (n > kMaxGroundSet) throw std::out_of_range("label set too large");
  Label limit = Label{1} << n;
  for (Label b = (Label{1} << k) - 1; b < limit; b = next_same_popcount(b)) f(deposit(b, set));
}

// Calls f(s) for every size-k subset of [m] in colex order.
template <class F>
void for_each_subset(int m, int k, F&& f) {
  if (m > kMaxGroundSet) throw std::out_of_range("ground set too large");
  Label all = (Label{1} << m) - 1;
  for_each_subset_of(all, k, f);
}

}  // namespace mmda::instances
