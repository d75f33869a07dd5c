#pragma once

// Counter-based seeding. Sample i of a run with master seed s draws from
// SplitMix64(derive_stream_seed(s, i)); nothing else touches that stream, so
// results do not depend on how sample indices are split across workers.

#include <cstdint>

#include "sweeplab/rational.hpp"

namespace sweeplab {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound). Lemire's multiply-shift; the slight bias
  /// for huge bounds is irrelevant at the sizes used here.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(master_seed ^ mix64(index + 0x9E3779B97F4A7C15ULL));
}

/// Bernoulli(p) decided by one 64-bit draw u: success iff u < floor(p * 2^64),
/// with p = 1 always succeeding. Exactly one draw is consumed per coin.
class BernoulliThreshold {
 public:
  BernoulliThreshold() = default;
  explicit BernoulliThreshold(const Rational& p);

  bool operator()(SplitMix64& rng) const {
    const std::uint64_t u = rng.next();
    return (u < threshold_) | always_;
  }
  bool operator==(const BernoulliThreshold&) const = default;

 private:
  std::uint64_t threshold_ = 0;
  bool always_ = false;
};

}  // namespace sweeplab
