#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "obsgram/rng.hpp"

using namespace obsgram;

// Known-answer vectors published with Random123.
TEST(Philox, KnownAnswers) {
  using C = std::array<std::uint32_t, 4>;
  using K = std::array<std::uint32_t, 2>;
  EXPECT_EQ(philox4x32(C{0, 0, 0, 0}, K{0, 0}),
            (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32(C{~0u, ~0u, ~0u, ~0u}, K{~0u, ~0u}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                       K{0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, OrderIndependent) {
  const CounterRng rng(42, {3, 1, -1, 0});
  std::vector<double> forward, backward(1000);
  for (std::uint64_t i = 0; i < 1000; ++i) forward.push_back(rng.normal(i));
  for (std::uint64_t i = 1000; i-- > 0;) backward[i] = rng.normal(i);
  EXPECT_EQ(forward, backward);
  const CounterRng again(42, {3, 1, -1, 0});
  EXPECT_EQ(again.normal(517), forward[517]);
}

TEST(CounterRng, UniformRange) {
  const CounterRng rng(7, {});
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = rng.uniform(i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(CounterRng, NormalMoments) {
  const CounterRng rng(11, {0, 0, 1, 0});
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(static_cast<std::uint64_t>(i));
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n - mean * mean, 1.0, 0.02);
}

TEST(CounterRng, StreamsDiffer) {
  const CounterRng a(5, {0, 0, 1, 0});
  const CounterRng b(5, {0, 0, -1, 0});
  const CounterRng c(6, {0, 0, 1, 0});
  EXPECT_NE(a.normal(0), b.normal(0));
  EXPECT_NE(a.normal(0), c.normal(0));
}
