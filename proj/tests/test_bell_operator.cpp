#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <sstream>
#include <vector>

#include "mkbell/bell_operator.hpp"
#include "mkbell/correlations.hpp"

using namespace mkbell;

namespace {

std::map<std::uint32_t, std::int64_t> as_map(const BellExpansion& b) {
  std::map<std::uint32_t, std::int64_t> m;
  for (const auto& [w, c] : b.terms) m[w] = c;
  return m;
}

// Largest |numerator| of <B> over every deterministic +-1 outcome
// assignment, in exact integer arithmetic.
std::int64_t deterministic_max_numerator(const BellExpansion& b) {
  const int n = b.n;
  std::int64_t best = 0;
  const std::uint64_t combos = 1ull << (2 * n);  // two sign bits per party
  for (std::uint64_t outcome = 0; outcome < combos; ++outcome) {
    std::int64_t value = 0;
    for (const auto& [w, num] : b.terms) {
      int sign = 1;
      for (int i = 0; i < n; ++i) {
        const std::uint64_t chosen = (outcome >> (2 * i + ((w >> i) & 1))) & 1;
        if (chosen) sign = -sign;
      }
      value += sign * num;
    }
    best = std::max(best, std::abs(value));
  }
  return best;
}

}  // namespace

TEST_CASE("two-party expansion matches the CHSH table", "[bell]") {
  const auto b = build_mk(2);
  REQUIRE(b.n == 2);
  REQUIRE(b.denominator() == 2);
  REQUIRE_FALSE(b.exceeds_dense_cap);
  const auto m = as_map(b);
  REQUIRE(m.size() == 4);
  REQUIRE(m.at(0b00) == 1);
  REQUIRE(m.at(0b01) == 1);
  REQUIRE(m.at(0b10) == 1);
  REQUIRE(m.at(0b11) == -1);
}

TEST_CASE("three-party expansion keeps four terms", "[bell]") {
  const auto b = build_mk(3);
  REQUIRE(b.denominator() == 4);
  const auto m = as_map(b);
  REQUIRE(m.size() == 4);
  REQUIRE(m.at(0b001) == 2);  // A'BC
  REQUIRE(m.at(0b010) == 2);  // AB'C
  REQUIRE(m.at(0b100) == 2);  // ABC'
  REQUIRE(m.at(0b111) == -2);
}

TEST_CASE("four-party expansion has sixteen quarter-weight terms", "[bell]") {
  const auto b = build_mk(4);
  REQUIRE(b.denominator() == 8);
  REQUIRE(b.terms.size() == 16);
  for (const auto& [w, c] : b.terms) REQUIRE(std::abs(c) == 2);
  const auto m = as_map(b);
  REQUIRE(m.at(0b0000) == -2);  // ABCD
  REQUIRE(m.at(0b1000) == 2);   // ABCD'
  REQUIRE(m.at(0b1111) == -2);  // A'B'C'D'
}

TEST_CASE("nonzero term counts follow the parity pattern", "[bell]") {
  REQUIRE(build_mk(2).terms.size() == 4);
  REQUIRE(build_mk(3).terms.size() == 4);
  REQUIRE(build_mk(4).terms.size() == 16);
  REQUIRE(build_mk(5).terms.size() == 16);
  REQUIRE(build_mk(6).terms.size() == 64);
}

TEST_CASE("party counts outside the supported range are rejected", "[bell]") {
  REQUIRE_THROWS_AS(build_mk(1), std::invalid_argument);
  REQUIRE_THROWS_AS(build_mk(21), std::invalid_argument);
  REQUIRE(build_mk(13).exceeds_dense_cap);
}

TEST_CASE("prime swap complements words and is an involution", "[bell]") {
  const auto swapped = prime_swap(build_mk(2));
  const auto m = as_map(swapped);
  REQUIRE(m.at(0b11) == 1);  // A'B'
  REQUIRE(m.at(0b10) == 1);  // A B'  <- complement of A'B
  REQUIRE(m.at(0b01) == 1);
  REQUIRE(m.at(0b00) == -1);  // AB

  const auto swapped3 = as_map(prime_swap(build_mk(3)));
  REQUIRE(swapped3.at(0b110) == 2);  // AB'C'
  REQUIRE(swapped3.at(0b101) == 2);  // A'BC'
  REQUIRE(swapped3.at(0b011) == 2);  // A'B'C
  REQUIRE(swapped3.at(0b000) == -2);

  for (int n = 2; n <= 6; ++n) {
    const auto b = build_mk(n);
    const auto twice = prime_swap(prime_swap(b));
    REQUIRE(twice.terms == b.terms);
  }
}

TEST_CASE("trivial unit correlations give the local bound", "[bell]") {
  for (int n = 2; n <= 6; ++n) {
    const double v = bell_value(build_mk(n), [](std::uint32_t) { return 1.0; });
    REQUIRE(v == 1.0);
  }
}

TEST_CASE("deterministic strategies never beat the local bound", "[bell]") {
  for (int n = 2; n <= 6; ++n) {
    const auto b = build_mk(n);
    REQUIRE(deterministic_max_numerator(b) == b.denominator());
  }
}

TEST_CASE("the pure GHZ optimum reaches the two-party Tsirelson value", "[bell]") {
  SettingsTable t(2);
  t.setting(0, 0) = ObservableSetting(pi / 2, 0.0);
  t.setting(0, 1) = ObservableSetting(pi / 2, pi / 2);
  t.setting(1, 0) = ObservableSetting(pi / 2, -pi / 4);
  t.setting(1, 1) = ObservableSetting(pi / 2, pi / 4);
  const double v =
      bell_value(build_mk(2), [&](std::uint32_t w) { return correlate_word(t, std::nullopt, w); });
  REQUIRE(v == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("recursion matches a direct expansion of the defining identity", "[bell]") {
  // B_n from B_{n-1} and its prime swap, assembled term by term.
  for (int n = 3; n <= 6; ++n) {
    const auto prev = build_mk(n - 1);
    const auto prev_swapped = prime_swap(prev);
    std::map<std::uint32_t, double> assembled;
    const std::uint32_t hi = 1u << (n - 1);
    for (const auto& [w, c] : prev.terms) {
      assembled[w] += 0.5 * std::ldexp(static_cast<double>(c), 2 - n);
      assembled[w | hi] += 0.5 * std::ldexp(static_cast<double>(c), 2 - n);
    }
    for (const auto& [w, c] : prev_swapped.terms) {
      assembled[w] += 0.5 * std::ldexp(static_cast<double>(c), 2 - n);
      assembled[w | hi] -= 0.5 * std::ldexp(static_cast<double>(c), 2 - n);
    }
    const auto b = build_mk(n);
    for (auto& [w, v] : assembled) {
      const double expected = std::ldexp(static_cast<double>(b.numerator(w)), 1 - n);
      REQUIRE(v == Catch::Approx(expected).margin(1e-15));
    }
  }
}

TEST_CASE("expansion dump is stable", "[bell]") {
  std::ostringstream os;
  dump(build_mk(3), os);
  REQUIRE(os.str() ==
          "100 2/4\n"
          "010 2/4\n"
          "001 2/4\n"
          "111 -2/4\n");
}
