#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include "pmed/bigint.hpp"

namespace pmed {

/// Deterministic random source: every randomized operation in the engine
/// takes one of these, so protocol traces are reproducible under a fixed
/// seed. Backed by GMP's Mersenne Twister. Not thread-safe; use one per
/// concurrent context (see derive()).
class Rng {
 public:
  explicit Rng(uint64_t seed);

  /// Uniform in [0, n). n > 0.
  Int below(const Int& n);
  /// Uniform in [1, n).
  Int nonzero_below(const Int& n);
  /// Uniform in [lo, hi). lo < hi.
  Int range(const Int& lo, const Int& hi);
  /// Uniform k-bit draw, i.e. [0, 2^k).
  Int bits(size_t k);

  bool coin();
  uint64_t u64();
  std::array<uint8_t, 16> id16();

  /// Independent child generator; deterministic given this one's state.
  Rng derive();

  /// Seed from OS entropy for production wiring.
  static Rng from_entropy();

  Rng(Rng&&) noexcept = default;
  Rng& operator=(Rng&&) noexcept = default;
  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;

 private:
  std::unique_ptr<gmp_randclass> state_;
};

}  // namespace pmed
