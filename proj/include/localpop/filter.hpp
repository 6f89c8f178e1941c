#pragma once

// The local-popularity filter: pairwise row similarity, top-T neighbor
// selection, and most-popular-column recommendation with diagnostics.
//
// Similarity between rows i and j counts positions sampled in both rows
// with equal values:
//   s_ij = sum_c 1{Y(i,c) != *} * 1{Y(j,c) != *} * 1{Y(i,c) = Y(j,c)}
// computed word-parallel as popcount(sampled_i & sampled_j & ~(values_i ^
// values_j)); masked value bits are gated out by the sampled mask, padding
// bits are zero in the mask.
//
// The target row is excluded from its own candidate set: including it would
// only displace one informative neighbor, since its own erased columns are
// by definition erased for it too. Zero-similarity rows remain eligible
// (no threshold), and candidate columns with no votes among the top set tie
// at zero ones and remain eligible; both are deliberate.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "localpop/channel.hpp"
#include "localpop/model.hpp"
#include "localpop/rng.hpp"

namespace localpop {

// ------------------------------------------------------------ tie policies --

// LowestIndex: deterministic, smallest index wins.
// RandomSeeded: uniform among tied candidates; randomness derived from
//   (seed, target, T) so results do not depend on call order.
// ExpectedOverTies: legal only in enumeration/evaluation contexts that
//   return probabilities; selection APIs reject it.
struct LowestIndex {};
struct RandomSeeded {
  std::uint64_t seed = 0;
};
struct ExpectedOverTies {};
using TiePolicy = std::variant<LowestIndex, RandomSeeded, ExpectedOverTies>;

inline bool is_expected_over_ties(const TiePolicy& tie) noexcept {
  return std::holds_alternative<ExpectedOverTies>(tie);
}

// ---------------------------------------------------------------- similarity --

inline std::int64_t similarity(const Observation& obs, std::int64_t i, std::int64_t j) {
  if (i == j) throw std::invalid_argument("similarity: i != j violated (self-similarity)");
  if (i < 0 || i >= obs.n() || j < 0 || j >= obs.n())
    throw std::out_of_range("similarity: row index out of range");
  const std::uint64_t* si = obs.sampled_row(i);
  const std::uint64_t* sj = obs.sampled_row(j);
  const std::uint64_t* vi = obs.values_row(i);
  const std::uint64_t* vj = obs.values_row(j);
  std::int64_t acc = 0;
  for (std::int64_t w = 0; w < obs.words_per_row(); ++w)
    acc += std::popcount(si[w] & sj[w] & ~(vi[w] ^ vj[w]));
  return acc;
}

// All similarities against one target row; the self entry degenerates to the
// target's own sampled count (every sampled position trivially agrees).
inline void similarity_row_into(const Observation& obs, std::int64_t target,
                                std::vector<std::int64_t>& out) {
  const std::int64_t n = obs.n();
  out.resize(static_cast<std::size_t>(n));
  const std::uint64_t* st = obs.sampled_row(target);
  const std::uint64_t* vt = obs.values_row(target);
  const std::int64_t words = obs.words_per_row();
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint64_t* si = obs.sampled_row(i);
    const std::uint64_t* vi = obs.values_row(i);
    std::int64_t acc = 0;
    for (std::int64_t w = 0; w < words; ++w)
      acc += std::popcount(st[w] & si[w] & ~(vt[w] ^ vi[w]));
    out[static_cast<std::size_t>(i)] = acc;
  }
}

inline std::vector<std::int64_t> similarity_row(const Observation& obs,
                                                std::int64_t target) {
  std::vector<std::int64_t> out;
  similarity_row_into(obs, target, out);
  return out;
}

// ------------------------------------------------------------------- top-T --

namespace detail {

// Selects the top-T candidate rows given precomputed similarities. Rows with
// similarity strictly above the cutoff always enter; the remaining seats
// among cutoff-tied rows go to the lowest indices (LowestIndex) or a uniform
// random subset (RandomSeeded). Output sorted by (similarity desc, policy
// order). `scratch` holds tied indices between calls to avoid reallocation.
inline void select_top_into(const std::vector<std::int64_t>& sims, std::int64_t target,
                            std::int64_t T, const TiePolicy& tie,
                            std::vector<std::int32_t>& out,
                            std::vector<std::int32_t>& scratch,
                            std::vector<std::int64_t>& vals_scratch) {
  const auto n = static_cast<std::int64_t>(sims.size());
  if (T < 1 || T > n - 1) throw std::invalid_argument("top_T: T <= n-1 violated");
  if (is_expected_over_ties(tie))
    throw std::invalid_argument("top_T: ExpectedOverTies is not a selection policy");

  // Cutoff = T-th largest candidate similarity.
  vals_scratch.clear();
  for (std::int64_t i = 0; i < n; ++i)
    if (i != target) vals_scratch.push_back(sims[static_cast<std::size_t>(i)]);
  auto nth = vals_scratch.begin() + (T - 1);
  std::nth_element(vals_scratch.begin(), nth, vals_scratch.end(),
                   std::greater<std::int64_t>());
  const std::int64_t cutoff = *nth;

  out.clear();
  scratch.clear();
  for (std::int64_t i = 0; i < n; ++i) {
    if (i == target) continue;
    std::int64_t s = sims[static_cast<std::size_t>(i)];
    if (s > cutoff)
      out.push_back(static_cast<std::int32_t>(i));
    else if (s == cutoff)
      scratch.push_back(static_cast<std::int32_t>(i));
  }
  auto need = static_cast<std::size_t>(T) - out.size();
  if (std::holds_alternative<RandomSeeded>(tie) && need < scratch.size()) {
    Rng trng(Seed{mix_pair(std::get<RandomSeeded>(tie).seed,
                           static_cast<std::uint64_t>(target)),
                  static_cast<std::uint64_t>(T)});
    // Partial Fisher-Yates: first `need` slots become a uniform subset.
    for (std::size_t t = 0; t < need; ++t) {
      std::size_t j = t + static_cast<std::size_t>(trng.next_below(scratch.size() - t));
      std::swap(scratch[t], scratch[j]);
    }
  }
  out.insert(out.end(), scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(need));
  std::stable_sort(out.begin(), out.end(),
                   [&](std::int32_t a, std::int32_t b) {
                     return sims[static_cast<std::size_t>(a)] >
                            sims[static_cast<std::size_t>(b)];
                   });
}

}  // namespace detail

inline std::vector<std::int32_t> top_T(const Observation& obs, std::int64_t target,
                                       std::int64_t T, const TiePolicy& tie) {
  if (target < 0 || target >= obs.n())
    throw std::out_of_range("top_T: target out of range");
  std::vector<std::int64_t> sims;
  similarity_row_into(obs, target, sims);
  std::vector<std::int32_t> out, scratch;
  std::vector<std::int64_t> vals;
  detail::select_top_into(sims, target, T, tie, out, scratch, vals);
  return out;
}

// ---------------------------------------------------------------- recommend --

struct RecommendationTrace {
  std::int32_t target = 0;
  std::int32_t chosen_column = 0;
  std::vector<std::int64_t> similarities;  // length n, s_{target, i}
  std::vector<std::int32_t> top_set;       // T rows, similarity-descending
  double purity = -1.0;  // fraction of top_set in the target's block; -1 until scored
  std::int64_t ones_count = 0;   // unerased Ones in the chosen column over top_set
  std::int64_t zeros_count = 0;  // unerased Zeros in the chosen column over top_set
};

// Reusable buffers for the per-trial recommendation pipeline.
struct FilterWorkspace {
  std::vector<std::int64_t> sims;
  std::vector<std::int32_t> top, tied;
  std::vector<std::int64_t> vals;
  std::vector<std::int32_t> ones, totals;
};

// Step 1 + Step 2. Returns std::nullopt iff the target row has no erased
// column (the trial must be discarded and counted separately).
inline std::optional<RecommendationTrace> recommend_into(const Observation& obs,
                                                         std::int64_t target,
                                                         std::int64_t T,
                                                         const TiePolicy& tie,
                                                         FilterWorkspace& ws) {
  const std::int64_t n = obs.n();
  if (target < 0 || target >= n) throw std::out_of_range("recommend: target out of range");
  if (is_expected_over_ties(tie))
    throw std::invalid_argument("recommend: ExpectedOverTies is not a selection policy");

  const std::uint64_t* st = obs.sampled_row(target);
  const std::int64_t words = obs.words_per_row();
  const std::int64_t tail_bits = n & 63;
  const std::uint64_t full = ~0ULL;
  const std::uint64_t tail_mask = tail_bits ? ((1ULL << tail_bits) - 1) : full;

  bool any_erased = false;
  for (std::int64_t w = 0; w < words && !any_erased; ++w) {
    std::uint64_t in_range = (w == words - 1) ? tail_mask : full;
    if (~st[w] & in_range) any_erased = true;
  }
  if (!any_erased) return std::nullopt;

  similarity_row_into(obs, target, ws.sims);
  detail::select_top_into(ws.sims, target, T, tie, ws.top, ws.tied, ws.vals);

  // Vote tally: per column, unerased Ones and totals among the top set,
  // restricted to columns erased in the target row.
  ws.ones.assign(static_cast<std::size_t>(n), 0);
  ws.totals.assign(static_cast<std::size_t>(n), 0);
  for (std::int32_t row : ws.top) {
    const std::uint64_t* sr = obs.sampled_row(row);
    const std::uint64_t* vr = obs.values_row(row);
    for (std::int64_t w = 0; w < words; ++w) {
      std::uint64_t in_range = (w == words - 1) ? tail_mask : full;
      std::uint64_t cand = sr[w] & ~st[w] & in_range;  // voted & erased-in-target
      while (cand) {
        std::int64_t j = w * 64 + std::countr_zero(cand);
        cand &= cand - 1;
        ws.totals[static_cast<std::size_t>(j)] += 1;
        ws.ones[static_cast<std::size_t>(j)] +=
            static_cast<std::int32_t>((vr[j >> 6] >> (j & 63)) & 1U);
      }
    }
  }

  // Argmax of ones over erased-in-target columns; count ties for the policy.
  std::int64_t best = -1;
  std::int32_t best_ones = -1;
  std::int64_t tie_count = 0;
  Rng* trng_ptr = nullptr;
  Rng trng(Seed{0, 0});
  if (const auto* rs = std::get_if<RandomSeeded>(&tie)) {
    trng = Rng(Seed{mix_pair(rs->seed, static_cast<std::uint64_t>(target) ^ 0xA5A5A5A5ULL),
                    static_cast<std::uint64_t>(T)});
    trng_ptr = &trng;
  }
  for (std::int64_t w = 0; w < words; ++w) {
    std::uint64_t in_range = (w == words - 1) ? tail_mask : full;
    std::uint64_t er = ~st[w] & in_range;
    while (er) {
      std::int64_t j = w * 64 + std::countr_zero(er);
      er &= er - 1;
      std::int32_t o = ws.ones[static_cast<std::size_t>(j)];
      if (o > best_ones) {
        best_ones = o;
        best = j;
        tie_count = 1;
      } else if (o == best_ones) {
        ++tie_count;
        // Reservoir pick keeps a uniform choice among ties in one pass.
        if (trng_ptr && trng_ptr->next_below(static_cast<std::uint64_t>(tie_count)) == 0)
          best = j;
      }
    }
  }

  RecommendationTrace trace;
  trace.target = static_cast<std::int32_t>(target);
  trace.chosen_column = static_cast<std::int32_t>(best);
  trace.similarities = ws.sims;
  trace.top_set = ws.top;
  trace.ones_count = ws.ones[static_cast<std::size_t>(best)];
  trace.zeros_count = ws.totals[static_cast<std::size_t>(best)] -
                      ws.ones[static_cast<std::size_t>(best)];
  return trace;
}

inline std::optional<RecommendationTrace> recommend(const Observation& obs,
                                                    std::int64_t target, std::int64_t T,
                                                    const TiePolicy& tie) {
  FilterWorkspace ws;
  return recommend_into(obs, target, T, tie, ws);
}

// ------------------------------------------------------------------- score --

// 1 iff the recommended entry's true value is 0.
inline int score(const GroundTruth& gt, const RecommendationTrace& trace) {
  return reconstruct_entry(gt, trace.target, trace.chosen_column) == 0 ? 1 : 0;
}

// Fraction of the top set inside the target's true block; the all-good flag
// is against the achievable maximum min(T, k-1) (the target itself never
// counts as its own neighbor).
inline double purity(const GroundTruth& gt, std::int64_t target,
                     const std::vector<std::int32_t>& top_set) {
  if (top_set.empty()) return 0.0;
  std::int64_t good = 0;
  std::int32_t tb = gt.row_block[static_cast<std::size_t>(target)];
  for (std::int32_t row : top_set)
    if (gt.row_block[static_cast<std::size_t>(row)] == tb) ++good;
  return static_cast<double>(good) / static_cast<double>(top_set.size());
}

inline std::int64_t good_neighbor_count(const GroundTruth& gt, std::int64_t target,
                                        const std::vector<std::int32_t>& top_set) {
  std::int64_t good = 0;
  std::int32_t tb = gt.row_block[static_cast<std::size_t>(target)];
  for (std::int32_t row : top_set)
    if (gt.row_block[static_cast<std::size_t>(row)] == tb) ++good;
  return good;
}

}  // namespace localpop
