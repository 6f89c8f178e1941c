#pragma once

// Observation matrices and the noisy-erasure channel.
//
// An Observation stores the n x n ternary matrix Y over {0, 1, *} as two
// bit-planes: a sampled mask (1 = entry observed) and a value plane that is
// meaningful only where sampled. Rows are padded to whole 64-bit words;
// padding and masked value bits are kept zero by the generators and must
// never influence results (the sampled mask gates every read).
//
// Channel semantics per entry, independent across entries: the true bit
// X(i,j) is flipped with probability p, then erased with probability
// epsilon. The bulk generator walks each row by geometric gap sampling, so
// its cost is proportional to the number of *sampled* entries, not n^2.

#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <utility>
#include <vector>

#include "localpop/model.hpp"
#include "localpop/rng.hpp"

namespace localpop {

enum class Ternary : std::uint8_t { Zero = 0, One = 1, Erased = 2 };

// ------------------------------------------------------------ observation --

class Observation {
 public:
  Observation() = default;
  explicit Observation(std::int64_t n) { reset(n); }

  void reset(std::int64_t n) {
    if (n <= 0) throw std::invalid_argument("Observation: n positive violated");
    n_ = n;
    words_ = (n + 63) / 64;
    sampled_.assign(static_cast<std::size_t>(n_ * words_), 0);
    values_.assign(static_cast<std::size_t>(n_ * words_), 0);
  }

  std::int64_t n() const noexcept { return n_; }
  std::int64_t words_per_row() const noexcept { return words_; }

  const std::uint64_t* sampled_row(std::int64_t i) const noexcept {
    return sampled_.data() + static_cast<std::size_t>(i * words_);
  }
  const std::uint64_t* values_row(std::int64_t i) const noexcept {
    return values_.data() + static_cast<std::size_t>(i * words_);
  }
  std::uint64_t* sampled_row(std::int64_t i) noexcept {
    return sampled_.data() + static_cast<std::size_t>(i * words_);
  }
  std::uint64_t* values_row(std::int64_t i) noexcept {
    return values_.data() + static_cast<std::size_t>(i * words_);
  }

  bool is_sampled(std::int64_t i, std::int64_t j) const noexcept {
    return (sampled_row(i)[j >> 6] >> (j & 63)) & 1U;
  }
  int value_bit(std::int64_t i, std::int64_t j) const noexcept {
    return static_cast<int>((values_row(i)[j >> 6] >> (j & 63)) & 1U);
  }

  Ternary at(std::int64_t i, std::int64_t j) const {
    check_index(i, j);
    if (!is_sampled(i, j)) return Ternary::Erased;
    return value_bit(i, j) ? Ternary::One : Ternary::Zero;
  }

  void set(std::int64_t i, std::int64_t j, Ternary t) {
    check_index(i, j);
    std::uint64_t bit = 1ULL << (j & 63);
    std::uint64_t& sw = sampled_row(i)[j >> 6];
    std::uint64_t& vw = values_row(i)[j >> 6];
    if (t == Ternary::Erased) {
      sw &= ~bit;
      vw &= ~bit;  // keep masked value bits zero
    } else {
      sw |= bit;
      if (t == Ternary::One)
        vw |= bit;
      else
        vw &= ~bit;
    }
  }

  // Test hook for the masked-bit independence property: flip a value bit at
  // an erased position without touching the sampled mask.
  void corrupt_masked_value_bit(std::int64_t i, std::int64_t j) {
    check_index(i, j);
    if (is_sampled(i, j))
      throw std::logic_error("corrupt_masked_value_bit: position is sampled");
    values_row(i)[j >> 6] ^= 1ULL << (j & 63);
  }

  std::int64_t sampled_count() const noexcept {
    std::int64_t c = 0;
    for (std::uint64_t w : sampled_) c += std::popcount(w);
    return c;
  }

  bool operator==(const Observation& o) const = default;

 private:
  void check_index(std::int64_t i, std::int64_t j) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_)
      throw std::out_of_range("Observation: index out of range");
  }

  std::int64_t n_ = 0;
  std::int64_t words_ = 0;
  std::vector<std::uint64_t> sampled_;
  std::vector<std::uint64_t> values_;
};

// ------------------------------------------------------- scalar reference --

// Single-entry channel: two independent uniforms decide erasure and flip.
inline Ternary flip_and_erase(int x, double p, double epsilon, std::uint64_t u_erase,
                              std::uint64_t u_flip) {
  if (!(p >= 0.0 && p < 0.5))
    throw std::invalid_argument("flip_and_erase: p in [0, 1/2) violated");
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw std::invalid_argument("flip_and_erase: epsilon in [0, 1) violated");
  if (u_erase < Rng::threshold64(epsilon)) return Ternary::Erased;
  int v = x ^ (u_flip < Rng::threshold64(p) ? 1 : 0);
  return v ? Ternary::One : Ternary::Zero;
}

// ---------------------------------------------------------- bulk sampling --

// Reusable scratch for the generator: per-block-row column bit patterns.
struct ChannelWorkspace {
  std::vector<std::uint64_t> patterns;  // r rows of `words` words each
};

// Fill `out` with one channel realization of gt. Draw layout (frozen by
// regression tests): for epsilon > 0, one 64-bit draw per sampled entry
// (high 32 bits resolve the erasure gap, low 32 bits the flip), plus one
// extra draw per gap escape; for epsilon == 0, one draw per entry when
// p > 0 and none when p == 0.
inline void generate_observation(const GroundTruth& gt, double p, double epsilon,
                                 Rng& rng, Observation& out, ChannelWorkspace& ws) {
  const std::int64_t n = gt.n;
  if (out.n() != n) out.reset(n);
  const std::int64_t words = out.words_per_row();

  // Per-block-row patterns over permuted columns: pattern(b, j) = xi(b, col_block(j)).
  ws.patterns.assign(static_cast<std::size_t>(gt.r * words), 0);
  for (std::int64_t b = 0; b < gt.r; ++b) {
    std::uint64_t* row = ws.patterns.data() + static_cast<std::size_t>(b * words);
    const std::uint8_t* xi = gt.block_values.data() + static_cast<std::size_t>(b * gt.r);
    for (std::int64_t j = 0; j < n; ++j)
      row[j >> 6] |= static_cast<std::uint64_t>(xi[gt.col_block[static_cast<std::size_t>(j)]])
                     << (j & 63);
  }

  const std::uint64_t thr_flip64 = Rng::threshold64(p);
  const std::uint32_t thr_flip32 = Rng::threshold32(p);

  if (epsilon == 0.0) {
    // Dense: everything sampled.
    const std::uint64_t full = ~0ULL;
    const std::int64_t tail_bits = n & 63;
    const std::uint64_t tail_mask = tail_bits ? ((1ULL << tail_bits) - 1) : full;
    for (std::int64_t i = 0; i < n; ++i) {
      std::uint64_t* srow = out.sampled_row(i);
      std::uint64_t* vrow = out.values_row(i);
      const std::uint64_t* pat =
          ws.patterns.data() +
          static_cast<std::size_t>(gt.row_block[static_cast<std::size_t>(i)] * words);
      for (std::int64_t w = 0; w < words; ++w) {
        srow[w] = (w == words - 1) ? tail_mask : full;
        vrow[w] = pat[w];
      }
      if (p > 0.0) {
        for (std::int64_t j = 0; j < n; ++j)
          if (rng.next() < thr_flip64) vrow[j >> 6] ^= 1ULL << (j & 63);
      }
    }
    return;
  }

  GeometricSkip skip(epsilon);
  for (std::int64_t i = 0; i < n; ++i) {
    std::uint64_t* srow = out.sampled_row(i);
    std::uint64_t* vrow = out.values_row(i);
    std::memset(srow, 0, static_cast<std::size_t>(words) * 8);
    std::memset(vrow, 0, static_cast<std::size_t>(words) * 8);
    const std::uint64_t* pat =
        ws.patterns.data() +
        static_cast<std::size_t>(gt.row_block[static_cast<std::size_t>(i)] * words);
    std::int64_t j = -1;
    for (;;) {
      std::uint32_t aux = 0;
      j += 1 + skip.sample(rng, aux);
      if (j >= n) break;
      std::uint64_t bit = 1ULL << (j & 63);
      srow[j >> 6] |= bit;
      std::uint64_t v = (pat[j >> 6] >> (j & 63)) & 1U;
      v ^= (aux < thr_flip32) ? 1U : 0U;
      vrow[j >> 6] |= v << (j & 63);
    }
  }
}

// Convenience overloads.
inline void generate_observation(const GroundTruth& gt, double p, double epsilon,
                                 Rng& rng, Observation& out) {
  ChannelWorkspace ws;
  generate_observation(gt, p, epsilon, rng, out, ws);
}

// One fully seeded instance: truth then channel, from a single Seed.
inline std::pair<GroundTruth, Observation> generate_instance(const ModelParams& params,
                                                             Seed seed) {
  Rng rng(seed);
  GroundTruth gt = generate_truth(params, rng);
  Observation obs;
  generate_observation(gt, params.p, params.epsilon, rng, obs);
  return {std::move(gt), std::move(obs)};
}

}  // namespace localpop
