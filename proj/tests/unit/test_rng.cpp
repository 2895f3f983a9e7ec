// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "elliptic/rng.hpp"

namespace elliptic {
namespace {

TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, PureFunctionOfIndex) {
  const CounterRng a(42, StreamDomain::kOffDiagonalPairs, 3);
  const CounterRng b(42, StreamDomain::kOffDiagonalPairs, 3);
  for (std::uint64_t i : {0ull, 1ull, 1ull << 40, ~0ull}) EXPECT_EQ(a.bits(i), b.bits(i));
}

TEST(CounterRng, StreamsAreSeparated) {
  std::set<std::uint64_t> seen;
  for (auto d : {StreamDomain::kOffDiagonalPairs, StreamDomain::kDiagonal, StreamDomain::kSmallBall}) {
    for (std::uint32_t draw : {0u, 1u}) {
      for (std::uint64_t seed : {0ull, 1ull, 1ull << 32}) {
        seen.insert(CounterRng(seed, d, draw).bits(7)[0]);
      }
    }
  }
  EXPECT_EQ(seen.size(), 18u);
}

TEST(CounterRng, UniformsInOpenInterval) {
  EXPECT_GT(CounterRng::to_open_unit(0), 0.0);
  EXPECT_LT(CounterRng::to_open_unit(~0ull), 1.0);
  const CounterRng r(5, StreamDomain::kUser, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto u = r.uniforms(static_cast<std::uint64_t>(i));
    ASSERT_GT(u[0], 0.0);
    ASSERT_LT(u[1], 1.0);
    sum += u[0] + u[1];
  }
  // mean 1/2, sd of the mean sqrt(1/12 / 2n)
  EXPECT_NEAR(sum / (2.0 * n), 0.5, 4.0 * std::sqrt(1.0 / 12.0 / (2.0 * n)));
}

TEST(CounterRng, NormalMoments) {
  const CounterRng r(9, StreamDomain::kUser, 0);
  const int n = 100000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto g = r.normals(static_cast<std::uint64_t>(i));
    m1 += g[0];
    m2 += g[0] * g[0];
    m4 += std::pow(g[0], 4);
    cross += g[0] * g[1];
  }
  EXPECT_NEAR(m1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
  EXPECT_NEAR(cross / n, 0.0, 4.0 / std::sqrt(n));
}

TEST(CounterEngine, SequentialMatchesIndexedBlocks) {
  const CounterRng r(3, StreamDomain::kVectors, 2);
  CounterEngine e(r, 10);
  const auto b10 = r.bits(10);
  const auto b11 = r.bits(11);
  EXPECT_EQ(e(), b10[0]);
  EXPECT_EQ(e(), b10[1]);
  EXPECT_EQ(e(), b11[0]);
  std::vector<int> v{1, 2, 3, 4, 5};
  std::shuffle(v.begin(), v.end(), e);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<int>{1, 2, 3, 4, 5}));
}

}  // namespace
}  // namespace elliptic
