#pragma once

#include <cstdint>
#include <string_view>

namespace medsr {

/// SplitMix64 step: state += 0x9E3779B97F4A7C15, then the standard
/// xor-shift-multiply finalizer. Used to expand a 64-bit seed.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// FNV-1a 64-bit over the bytes of `text`. Stable across platforms; used for
/// per-file seed derivation and config hashing.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// xoshiro256** seeded by four consecutive SplitMix64 outputs of `seed`.
///
/// Update rule (all arithmetic mod 2^64):
///   result = rotl(s1 * 5, 7) * 9
///   t = s1 << 17
///   s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
///
/// uniform() takes the top 53 bits: (next() >> 11) * 2^-53, in [0,1).
/// normal() is Box-Muller: u1 = 1 - uniform() (so u1 in (0,1]), u2 = uniform(),
/// r = sqrt(-2 ln u1); it returns r*cos(2*pi*u2) and caches r*sin(2*pi*u2)
/// for the next call.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi], inclusive, by multiply-shift on 64 random bits.
  int uniform_int(int lo, int hi) noexcept;
  double normal() noexcept;

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace medsr
