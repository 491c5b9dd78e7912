/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <cmath>
#include <cstdint>

namespace trivid {

// Counter-based pseudo-random generator. Each draw is a pure function of
// (seed, stream, counter) built from the splitmix64 finalizer, so a given
// (seed, stream) pair yields the same integer sequence on every platform
// and streams can be split without sharing state.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : key_(mix(mix(seed + kGolden) ^ mix(stream + kStreamSalt))) {}

  uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

  // Uniform double in [0, 1), 53 mantissa bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be nonzero.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller without state carry: two uniforms per draw.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * kPi * u2);
  }

  // Derives an independent stream; the parent sequence is not advanced.
  Rng split(uint64_t substream) const {
    Rng child;
    child.key_ = mix(key_ ^ mix(substream + kSplitSalt));
    return child;
  }

 private:
  Rng() = default;

  static constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr uint64_t kStreamSalt = 0x1F123BB5159A55E5ull;
  static constexpr uint64_t kSplitSalt = 0xD1B54A32D192ED03ull;
  static constexpr double kPi = 3.14159265358979323846;

  static uint64_t mix(uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
  }

  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace trivid
