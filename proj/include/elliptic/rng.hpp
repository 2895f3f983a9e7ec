// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace elliptic {

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
 * easy as 1, 2, 3", SC'11). Stateless: maps a 128-bit counter and a 64-bit
 * key to 128 pseudorandom bits.
 */
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;
  static constexpr int kRounds = 10;

  static constexpr Counter block(Counter ctr, Key key) noexcept {
    for (int r = 0; r < kRounds; ++r) {
      if (r > 0) {
        key[0] += kWeylA;
        key[1] += kWeylB;
      }
      const std::uint64_t p0 = std::uint64_t{kMulA} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMulB} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = Counter{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Independent stream families. Each draw of a matrix uses its own pair of
/// (domain, draw index), so no two consumers ever share a counter.
enum class StreamDomain : std::uint32_t {
  kOffDiagonalPairs = 1,
  kDiagonal = 2,
  kPairAudit = 3,
  kSmallBall = 4,
  kVectors = 5,
  kUser = 0x100,
};

//---------------------------------------------------------------------------//
/*!
 * Counter-based generator keyed by (seed, domain, draw). Every value is a
 * pure function of its 64-bit index, so sampling order and thread layout
 * never change results.
 */
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, StreamDomain domain,
                       std::uint32_t draw) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        domain_(static_cast<std::uint32_t>(domain)),
        draw_(draw) {}

  constexpr std::array<std::uint64_t, 2> bits(std::uint64_t index) const noexcept {
    const auto out = Philox4x32::block(
        {static_cast<std::uint32_t>(index),
         static_cast<std::uint32_t>(index >> 32), draw_, domain_},
        key_);
    return {(std::uint64_t{out[1]} << 32) | out[0],
            (std::uint64_t{out[3]} << 32) | out[2]};
  }

  /// Two doubles in the open interval (0, 1).
  std::array<double, 2> uniforms(std::uint64_t index) const noexcept {
    const auto b = bits(index);
    return {to_open_unit(b[0]), to_open_unit(b[1])};
  }

  /// Two independent standard normals (Box-Muller on one block).
  std::array<double, 2> normals(std::uint64_t index) const noexcept {
    const auto u = uniforms(index);
    const double radius = std::sqrt(-2.0 * std::log(u[0]));
    const double angle = 2.0 * std::numbers::pi * u[1];
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  static constexpr double to_open_unit(std::uint64_t x) noexcept {
    return (static_cast<double>(x >> 12) + 0.5) * 0x1.0p-52;
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t domain_;
  std::uint32_t draw_;
};

/// Sequential adapter satisfying UniformRandomBitGenerator, for std
/// algorithms that want an engine. Position is the next counter index.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  explicit CounterEngine(CounterRng rng, std::uint64_t position = 0) noexcept
      : rng_(rng), position_(position) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (!have_spare_) {
      buffer_ = rng_.bits(position_++);
      have_spare_ = true;
      return buffer_[0];
    }
    have_spare_ = false;
    return buffer_[1];
  }

  double uniform() noexcept { return CounterRng::to_open_unit((*this)()); }

  double normal() noexcept {
    const double u0 = uniform();
    const double u1 = uniform();
    return std::sqrt(-2.0 * std::log(u0)) * std::cos(2.0 * std::numbers::pi * u1);
  }

 private:
  CounterRng rng_;
  std::uint64_t position_;
  std::array<std::uint64_t, 2> buffer_{};
  bool have_spare_ = false;
};

}  // namespace elliptic
