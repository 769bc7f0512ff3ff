// Mermin-Klyshko Bell operators, kept as exact dyadic coefficient tables
// over setting-choice words so the recursion never touches floating point.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mkbell/observables.hpp"

namespace mkbell {

// One term per setting-choice word w: bit i-1 of w is 1 when party i uses its
// primed setting. Coefficients are numerator / 2^(n-1) with int64 numerators;
// zero terms are dropped. Terms stay sorted by word.
struct BellExpansion {
  int n = 0;
  bool exceeds_dense_cap = false;
  std::vector<std::pair<std::uint32_t, std::int64_t>> terms;

  std::int64_t denominator() const { return std::int64_t{1} << (n - 1); }

  std::int64_t numerator(std::uint32_t word) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), word,
                               [](const auto& t, std::uint32_t w) { return t.first < w; });
    return (it != terms.end() && it->first == word) ? it->second : 0;
  }
};

// Recursive construction: B_n = (B_{n-1} (K + K') + B'_{n-1} (K - K')) / 2
// with the two-party base {AB: +1/2, AB': +1/2, A'B: +1/2, A'B': -1/2},
// where the primed variant B' complements every word. At numerator scale
// 2^(n-1) the halving cancels and the recursion stays in integers.
inline BellExpansion build_mk(int n) {
  if (n < 2) throw std::invalid_argument("Bell expansion needs n >= 2");
  if (n > 20) throw std::invalid_argument("Bell expansion capped at 20 parties");

  std::vector<std::int64_t> num(4, 0);
  num[0b00] = 1;
  num[0b01] = 1;
  num[0b10] = 1;
  num[0b11] = -1;
  for (int k = 3; k <= n; ++k) {
    const std::uint32_t half = 1u << (k - 1);
    const std::uint32_t mask = half - 1;
    std::vector<std::int64_t> next(std::size_t{2} * half, 0);
    for (std::uint32_t w = 0; w < half; ++w) {
      const std::int64_t a = num[w];
      const std::int64_t b = num[~w & mask];
      next[w] = a + b;
      next[w | half] = a - b;
    }
    num = std::move(next);
  }

  BellExpansion b;
  b.n = n;
  b.exceeds_dense_cap = n > dense_qubit_cap;
  for (std::uint32_t w = 0; w < num.size(); ++w)
    if (num[w] != 0) b.terms.emplace_back(w, num[w]);
  return b;
}

// Exchange primed and unprimed settings everywhere: words are complemented,
// coefficients kept.
inline BellExpansion prime_swap(const BellExpansion& b) {
  const std::uint32_t mask = (b.n >= 32) ? 0xffffffffu : ((1u << b.n) - 1);
  BellExpansion out;
  out.n = b.n;
  out.exceeds_dense_cap = b.exceeds_dense_cap;
  out.terms.reserve(b.terms.size());
  for (const auto& [w, c] : b.terms) out.terms.emplace_back(~w & mask, c);
  std::sort(out.terms.begin(), out.terms.end());
  return out;
}

// <B> = sum_w coeff(w) * correlate(w). Real is the accumulation type; the
// dyadic scale is applied once at the end, exactly.
template <class Real = double, class F>
Real bell_value(const BellExpansion& b, F&& correlate) {
  Real acc = 0;
  for (const auto& [w, c] : b.terms) acc += static_cast<Real>(c) * correlate(w);
  return std::ldexp(acc, 1 - b.n);
}

// Text dump for golden tests: one line per term, "word numerator/denominator",
// word rendered with party 1 leftmost and 1 marking the primed setting.
inline void dump(const BellExpansion& b, std::ostream& os) {
  for (const auto& [w, c] : b.terms) {
    std::string bits(static_cast<std::size_t>(b.n), '0');
    for (int i = 0; i < b.n; ++i)
      if (w & (1u << i)) bits[static_cast<std::size_t>(i)] = '1';
    os << bits << ' ' << c << '/' << b.denominator() << '\n';
  }
}

}  // namespace mkbell
