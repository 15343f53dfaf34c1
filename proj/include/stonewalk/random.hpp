// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reproducible random streams.
//
// Every replica owns one Stream. A stream is a xoshiro256** generator whose
// 256-bit state is the replica's stream key, derived from (masterSeed,
// replicaId) by SeedPlan. All variates below are produced by code in this
// file (no <random> distributions), so a seed reproduces the same draws on
// every standard library.
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace stonewalk {

__extension__ using uint128 = unsigned __int128;

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using StreamKey = std::array<std::uint64_t, 4>;

/// Derives per-replica stream keys from a master seed.
///
/// Key word i of replica r is
///
///     mix64(mix64(masterSeed) + (4*r + i + 1) * 0x9E3779B97F4A7C15)
///
/// The multiplier is odd, so the inner argument is injective in 4*r+i for
/// r < 2^62, and mix64 is a bijection: distinct replicas get distinct keys
/// and no key is all-zero. This derivation is frozen by golden vectors in the
/// test suite; changing it changes every published result.
class SeedPlan {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  constexpr SeedPlan(std::uint64_t masterSeed, std::uint64_t replicaCount) noexcept
      : masterSeed_(masterSeed), replicaCount_(replicaCount) {}

  constexpr std::uint64_t master_seed() const noexcept { return masterSeed_; }
  constexpr std::uint64_t replica_count() const noexcept { return replicaCount_; }

  constexpr StreamKey stream_for(std::uint64_t replicaId) const noexcept {
    const std::uint64_t base = mix64(masterSeed_);
    StreamKey key{};
    for (std::uint64_t i = 0; i < 4; ++i) {
      key[i] = mix64(base + (4 * replicaId + i + 1) * kGamma);
    }
    return key;
  }

 private:
  std::uint64_t masterSeed_;
  std::uint64_t replicaCount_;
};

/// xoshiro256** 1.0 (Blackman & Vigna), plus the variates the simulators need.
class Stream {
 public:
  explicit constexpr Stream(const StreamKey& key) noexcept : s_(key) {}

  constexpr std::uint64_t next() noexcept {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  /// One fair bit. Bits are taken from a buffered word, lowest first.
  constexpr bool bit() noexcept {
    if (bitsLeft_ == 0) {
      bits_ = next();
      bitsLeft_ = 64;
    }
    const bool b = (bits_ & 1U) != 0;
    bits_ >>= 1;
    --bitsLeft_;
    return b;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open() noexcept {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  /// Exactly uniform integer in [0, n), n >= 1 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) noexcept {
    uint128 m = static_cast<uint128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<uint128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double exponential(double rate) noexcept { return -std::log(uniform_open()) / rate; }

  /// Number of failures before the first success, success probability p in (0, 1].
  std::uint64_t geometric_failures(double p) noexcept {
    if (p >= 1.0) return 0;
    const double g = std::floor(std::log(uniform_open()) / std::log1p(-p));
    if (!(g < 9.0e18)) return std::numeric_limits<std::uint64_t>::max() / 2;
    return static_cast<std::uint64_t>(g);
  }

  /// Standard normal, Marsaglia polar method. The spare value is cached.
  double normal() noexcept {
    if (hasSpare_) {
      hasSpare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    hasSpare_ = true;
    return u * f;
  }

  /// Gamma(shape, 1) for shape >= 1 (Marsaglia–Tsang). Shape 0 returns 0.
  double gamma(double shape) noexcept {
    if (shape <= 0.0) return 0.0;
    if (shape == 1.0) return -std::log(uniform_open());
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Sum of `count` independent Exp(rate) holding times.
  double erlang(std::uint64_t count, double rate) noexcept {
    return gamma(static_cast<double>(count)) / rate;
  }

 private:
  StreamKey s_;
  std::uint64_t bits_ = 0;
  int bitsLeft_ = 0;
  double spare_ = 0.0;
  bool hasSpare_ = false;
};

inline Stream make_stream(const SeedPlan& plan, std::uint64_t replicaId) {
  return Stream(plan.stream_for(replicaId));
}

}  // namespace stonewalk
