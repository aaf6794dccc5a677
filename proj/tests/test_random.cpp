#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "splitgibbs/random.hpp"

using splitgibbs::RandomStream;
using splitgibbs::philox4x32_10;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors distributed with Random123 (kat_vectors).
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream words come from consecutive counter blocks") {
  RandomStream rng(0, 0);
  const auto block0 = philox4x32_10({0, 0, 0, 0}, {0, 0});
  const auto block1 = philox4x32_10({1, 0, 0, 0}, {0, 0});
  for (int i = 0; i < 4; ++i) CHECK(rng.next_u32() == block0[i]);
  for (int i = 0; i < 4; ++i) CHECK(rng.next_u32() == block1[i]);

  RandomStream keyed(0x0000000200000001ull, 0x0000000400000003ull);
  const auto expect = philox4x32_10({0, 0, 3, 4}, {1, 2});
  CHECK(keyed.next_u32() == expect[0]);
}

TEST_CASE("identical seed and stream replay; different streams diverge") {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const double va = a.normal();
    CHECK(va == b.normal());
    same_c += va == c.normal();
    same_d += va == d.normal();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
  CHECK(a.substream(8).next_u64() == RandomStream(42, 8).next_u64());
}

TEST_CASE("uniform stays in the open unit interval with the right mean") {
  RandomStream rng(1, 0);
  const int n = 200000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    s += u;
  }
  CHECK(std::abs(s / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("uniform_index covers the range evenly") {
  RandomStream rng(2, 0);
  CHECK(rng.uniform_index(0) == 0);
  CHECK(rng.uniform_index(1) == 0);
  const std::uint64_t bound = 7;
  const int n = 70000;
  std::vector<int> counts(bound, 0);
  for (int i = 0; i < n; ++i) {
    const auto k = rng.uniform_index(bound);
    REQUIRE(k < bound);
    ++counts[k];
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / bound;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 22.46);  // chi-square(6) 0.999 quantile
}

TEST_CASE("normal draws have unit variance and light tails") {
  RandomStream rng(3, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("fill_normal continues the same sequence as normal()") {
  RandomStream a(9, 1), b(9, 1);
  std::vector<double> buf(11);
  a.fill_normal(buf);
  for (double v : buf) CHECK(v == b.normal());
  CHECK(a.normal() == b.normal());
}
