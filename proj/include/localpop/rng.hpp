#pragma once

// Deterministic random number generation.
//
// All randomness in the library flows from a Seed (master, stream) pair
// through a xoshiro256++ generator seeded via splitmix64 mixing. The stream
// layout is frozen by regression tests: identical seeds reproduce identical
// instances bit-for-bit on any platform, independent of the standard
// library's <random> distributions (whose outputs are implementation
// defined).

#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace localpop {

// ------------------------------------------------------------------ seeds --

struct Seed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
};

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stable combiner for deriving sub-seeds (per sweep point, per tie-break
// call, ...). Not cryptographic; collision-resistant enough for Monte Carlo.
constexpr std::uint64_t mix_pair(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b ^ 0xD1B54A32D192ED03ULL));
}

// ------------------------------------------------------------------- core --

class Rng {
 public:
  explicit Rng(Seed seed) noexcept {
    std::uint64_t h = mix64(seed.master ^ 0x9E3779B97F4A7C15ULL) ^
                      mix64(seed.stream ^ 0xD1B54A32D192ED03ULL);
    for (auto& w : s_) {
      h += 0x9E3779B97F4A7C15ULL;
      w = mix64(h);
    }
  }

  // xoshiro256++ step.
  std::uint64_t next() noexcept {
    std::uint64_t result = std::rotl(s_[0] + s_[3], 23) + s_[0];
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound); Lemire multiply-shift rejection.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    unsigned __int128 m =
        static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(bound);
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      std::uint64_t t = (0 - bound) % bound;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(bound);
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Bernoulli event of probability threshold / 2^64.
  bool bernoulli(std::uint64_t threshold) noexcept { return next() < threshold; }

  // Probability -> 64-bit comparison threshold (event: draw < threshold).
  static std::uint64_t threshold64(double p) noexcept {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(static_cast<long double>(p) * 0x1.0p64L);
  }

  // 32-bit variant used by the bulk channel sampler (split-draw layout).
  static std::uint32_t threshold32(double p) noexcept {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return std::numeric_limits<std::uint32_t>::max();
    return static_cast<std::uint32_t>(static_cast<long double>(p) * 0x1.0p32L);
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
};

// -------------------------------------------------------- geometric skips --

// Samples gaps between observed entries for an erasure channel: the number
// of consecutive erased positions before the next sampled one follows
// Geometric(1 - epsilon) on {0, 1, 2, ...}. A cumulative threshold table on
// the high 32 bits of one draw resolves gaps 0..254 with a single binary
// search (no per-draw transcendentals); longer gaps recurse by
// memorylessness. The low 32 bits of the resolving draw are handed back to
// the caller as an independent uniform for the flip decision, so the hot
// loop costs one 64-bit draw per sampled entry.
class GeometricSkip {
 public:
  explicit GeometricSkip(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw std::invalid_argument("GeometricSkip: epsilon in (0,1) violated");
    long double acc = 0.0L;
    long double term = 1.0L - static_cast<long double>(epsilon);  // P(skip = s)
    for (std::size_t s = 0; s < kTable; ++s) {
      acc += term;
      term *= static_cast<long double>(epsilon);
      long double scaled = acc * 0x1.0p32L;
      cum_[s] = scaled >= 0x1.0p32L - 1.0L
                    ? std::numeric_limits<std::uint32_t>::max()
                    : static_cast<std::uint32_t>(scaled);
      if (s > 0 && cum_[s] < cum_[s - 1]) cum_[s] = cum_[s - 1];
    }
  }

  // Gap length; aux receives 32 independent uniform bits.
  std::int64_t sample(Rng& rng, std::uint32_t& aux) const noexcept {
    std::int64_t base = 0;
    for (;;) {
      std::uint64_t u = rng.next();
      auto hi = static_cast<std::uint32_t>(u >> 32);
      std::size_t lo = 0, len = kTable;
      while (len > 0) {  // first index with cum_[idx] > hi
        std::size_t half = len / 2;
        if (cum_[lo + half] <= hi) {
          lo += half + 1;
          len -= half + 1;
        } else {
          len = half;
        }
      }
      if (lo < kTable) {
        aux = static_cast<std::uint32_t>(u);
        return base + static_cast<std::int64_t>(lo);
      }
      base += static_cast<std::int64_t>(kTable);  // escape: gap >= 255
    }
  }

 private:
  static constexpr std::size_t kTable = 255;
  std::array<std::uint32_t, kTable> cum_{};
};

}  // namespace localpop
