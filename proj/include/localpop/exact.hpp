#pragma once

// Exact error probability for tiny instances by full enumeration.
//
// For n <= 3, every observation matrix over {0, 1, *} is enumerated with
// its channel probability (per entry: erased eps, agree (1-eps)(1-p),
// disagree (1-eps)p), the recommendation pipeline is evaluated for target
// row 0 with every step-1 cutoff subset and step-2 argmax tie averaged
// uniformly (the ExpectedOverTies policy), and no-erased-column outcomes
// are excluded and renormalized, the same conditional error the sampling
// estimator targets.
//
// The unconditional variant averages over all 2^(r*r) block-value matrices
// with canonical contiguous assignments. Averaging over assignments is
// unnecessary: relabeling rows/columns maps each outcome to one of equal
// probability, the block values are i.i.d. symmetric, and the tie-averaged
// error indicator is index-symmetric, so every balanced assignment yields
// the same value.

#include <array>
#include <cstdint>
#include <stdexcept>

#include "localpop/model.hpp"

namespace localpop {

struct ExactResult {
  double pe = 0.0;          // err_mass / (1 - skip_mass)
  double err_mass = 0.0;    // unconditional error probability mass
  double skip_mass = 0.0;   // mass of no-erased-column outcomes
  double total_mass = 0.0;  // enumeration sanity check, should be 1
};

namespace detail {

struct ExactEnumerator {
  std::int64_t n = 0;
  std::int64_t T = 0;
  double w_erase = 0.0, w_agree = 0.0, w_disagree = 0.0;
  std::array<int, 9> x{};   // materialized truth, row-major
  std::array<int, 9> y{};   // observation: 0/1 value, 2 erased
  double err_mass = 0.0, skip_mass = 0.0, total_mass = 0.0;

  void run(std::int64_t idx, double w) {
    if (w == 0.0) return;
    if (idx == n * n) {
      leaf(w);
      return;
    }
    auto i = static_cast<std::size_t>(idx);
    y[i] = 2;
    run(idx + 1, w * w_erase);
    y[i] = x[i];
    run(idx + 1, w * w_agree);
    y[i] = 1 - x[i];
    run(idx + 1, w * w_disagree);
  }

  void leaf(double w) {
    total_mass += w;

    std::array<int, 3> erased_cols{};
    int n_erased = 0;
    for (int j = 0; j < n; ++j)
      if (y[static_cast<std::size_t>(j)] == 2) erased_cols[static_cast<std::size_t>(n_erased++)] = j;
    if (n_erased == 0) {
      skip_mass += w;
      return;
    }

    // Similarities of candidate rows 1..n-1 to row 0.
    std::array<int, 3> sim{};
    for (int i = 1; i < n; ++i) {
      int s = 0;
      for (int c = 0; c < n; ++c) {
        int a = y[static_cast<std::size_t>(c)];
        int b = y[static_cast<std::size_t>(i * n + c)];
        if (a != 2 && b != 2 && a == b) ++s;
      }
      sim[static_cast<std::size_t>(i)] = s;
    }

    // Step-1 cutoff: T-th largest similarity among candidates.
    std::array<int, 2> vals{};
    int n_cand = static_cast<int>(n - 1);
    for (int i = 1; i < n; ++i) vals[static_cast<std::size_t>(i - 1)] = sim[static_cast<std::size_t>(i)];
    if (n_cand == 2 && vals[0] < vals[1]) std::swap(vals[0], vals[1]);
    int cutoff = vals[static_cast<std::size_t>(T - 1)];

    std::array<int, 2> definite{}, tied{};
    int n_def = 0, n_tied = 0;
    for (int i = 1; i < n; ++i) {
      int s = sim[static_cast<std::size_t>(i)];
      if (s > cutoff)
        definite[static_cast<std::size_t>(n_def++)] = i;
      else if (s == cutoff)
        tied[static_cast<std::size_t>(n_tied++)] = i;
    }
    int need = static_cast<int>(T) - n_def;

    // Average the error over every size-`need` subset of the tied group
    // (at n <= 3 the group has at most 2 members) and, inside each subset,
    // over the uniformly tie-broken argmax column.
    double err_sum = 0.0;
    int n_subsets = 0;
    std::array<int, 2> chosen{};
    auto eval_subset = [&](const std::array<int, 2>& extra, int n_extra) {
      std::array<int, 2> top{};
      int n_top = 0;
      for (int t = 0; t < n_def; ++t) top[static_cast<std::size_t>(n_top++)] = definite[static_cast<std::size_t>(t)];
      for (int t = 0; t < n_extra; ++t) top[static_cast<std::size_t>(n_top++)] = extra[static_cast<std::size_t>(t)];
      int best_ones = -1;
      std::array<int, 3> argmax{};
      int n_arg = 0;
      for (int e = 0; e < n_erased; ++e) {
        int j = erased_cols[static_cast<std::size_t>(e)];
        int ones = 0;
        for (int t = 0; t < n_top; ++t)
          if (y[static_cast<std::size_t>(top[static_cast<std::size_t>(t)] * n + j)] == 1) ++ones;
        if (ones > best_ones) {
          best_ones = ones;
          n_arg = 0;
          argmax[static_cast<std::size_t>(n_arg++)] = j;
        } else if (ones == best_ones) {
          argmax[static_cast<std::size_t>(n_arg++)] = j;
        }
      }
      double err = 0.0;
      for (int a = 0; a < n_arg; ++a)
        if (x[static_cast<std::size_t>(argmax[static_cast<std::size_t>(a)])] == 0) err += 1.0;
      err_sum += err / static_cast<double>(n_arg);
      ++n_subsets;
    };

    if (need == n_tied) {
      eval_subset(tied, n_tied);
    } else if (need == 0) {
      eval_subset(chosen, 0);
    } else {
      // need < n_tied: enumerate subsets (n_tied <= 2, need = 1).
      for (int t = 0; t < n_tied; ++t) {
        chosen[0] = tied[static_cast<std::size_t>(t)];
        eval_subset(chosen, 1);
      }
    }
    err_mass += w * err_sum / static_cast<double>(n_subsets);
  }
};

}  // namespace detail

inline ExactResult exact_ber_detail(const ModelParams& params, std::int64_t T,
                                    const GroundTruth& gt) {
  if (params.n > 3)
    throw std::invalid_argument("exact_ber: n <= 3 violated (enumeration only)");
  if (T < 1 || T > params.n - 1) throw std::invalid_argument("exact_ber: T <= n-1 violated");
  if (gt.n != params.n || gt.r != params.r)
    throw std::invalid_argument("exact_ber: ground truth shape mismatch");

  detail::ExactEnumerator en;
  en.n = params.n;
  en.T = T;
  en.w_erase = params.epsilon;
  en.w_agree = (1.0 - params.epsilon) * (1.0 - params.p);
  en.w_disagree = (1.0 - params.epsilon) * params.p;
  auto xm = materialize(gt);
  for (std::size_t i = 0; i < xm.size(); ++i) en.x[i] = xm[i];
  en.run(0, 1.0);

  ExactResult res;
  res.err_mass = en.err_mass;
  res.skip_mass = en.skip_mass;
  res.total_mass = en.total_mass;
  if (en.skip_mass >= 1.0)
    throw std::invalid_argument("exact_ber: recommendation impossible (row always sampled)");
  res.pe = en.err_mass / (1.0 - en.skip_mass);
  return res;
}

inline ExactResult exact_ber_unconditional_detail(const ModelParams& params,
                                                  std::int64_t T) {
  if (params.n > 3)
    throw std::invalid_argument("exact_ber: n <= 3 violated (enumeration only)");
  GroundTruth gt;
  gt.n = params.n;
  gt.r = params.r;
  gt.k = params.k;
  gt.row_block.resize(static_cast<std::size_t>(params.n));
  gt.col_block.resize(static_cast<std::size_t>(params.n));
  for (std::int64_t i = 0; i < params.n; ++i) {
    gt.row_block[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i / params.k);
    gt.col_block[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i / params.k);
  }
  const std::int64_t cells = params.r * params.r;
  const std::uint64_t combos = 1ULL << cells;
  ExactResult avg;
  for (std::uint64_t m = 0; m < combos; ++m) {
    gt.block_values.assign(static_cast<std::size_t>(cells), 0);
    for (std::int64_t b = 0; b < cells; ++b)
      gt.block_values[static_cast<std::size_t>(b)] =
          static_cast<std::uint8_t>((m >> b) & 1ULL);
    ExactResult one = exact_ber_detail(params, T, gt);
    avg.err_mass += one.err_mass;
    avg.skip_mass += one.skip_mass;
    avg.total_mass += one.total_mass;
  }
  double scale = 1.0 / static_cast<double>(combos);
  avg.err_mass *= scale;
  avg.skip_mass *= scale;
  avg.total_mass *= scale;
  avg.pe = avg.err_mass / (1.0 - avg.skip_mass);
  return avg;
}

inline double exact_ber(const ModelParams& params, std::int64_t T, const GroundTruth& gt) {
  return exact_ber_detail(params, T, gt).pe;
}

inline double exact_ber_unconditional(const ModelParams& params, std::int64_t T) {
  return exact_ber_unconditional_detail(params, T).pe;
}

}  // namespace localpop
