#pragma once

// Synthetic model domain types: parameter validation, scaling regimes, and
// the block-constant ground truth matrix.
//
// The model: an n x n binary matrix X partitioned into an r x r grid of
// k x k blocks by unknown row/column cluster assignments; X is constant on
// each block with value xi(i,j), the xi drawn i.i.d. Bernoulli(1/2).
// Indices are 1-based in prose conventions but 0-based in every API and
// external interface of this library.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "localpop/rng.hpp"

namespace localpop {

// ------------------------------------------------------------- parameters --

struct ModelParams {
  std::int64_t n = 0;  // matrix side length
  std::int64_t k = 0;  // cluster side length
  std::int64_t r = 0;  // number of row/column blocks
  double p = 0.0;      // symmetric flip probability, [0, 1/2)
  double epsilon = 0.0;  // erasure probability, [0, 1)

  ModelParams(std::int64_t n_, std::int64_t k_, std::int64_t r_, double p_, double epsilon_)
      : n(n_), k(k_), r(r_), p(p_), epsilon(epsilon_) {
    if (n <= 0 || k <= 0 || r <= 0)
      throw std::invalid_argument("ModelParams: n, k, r positive violated");
    if (n != r * k) throw std::invalid_argument("ModelParams: n = r*k violated");
    if (!(p >= 0.0 && p < 0.5))
      throw std::invalid_argument("ModelParams: p in [0, 1/2) violated");
    if (!(epsilon >= 0.0 && epsilon < 1.0))
      throw std::invalid_argument("ModelParams: epsilon in [0, 1) violated");
  }
};

// Erasure scaling epsilon = 1 - c / n^alpha with cluster growth k ~ n^beta.
struct ScalingRegime {
  double alpha = 0.0;             // erasure exponent, [0, 1)
  double c = 1.0;                 // erasure constant, > 0
  double cluster_exponent = 0.0;  // beta such that k ~ n^beta

  ScalingRegime(double alpha_, double c_, double cluster_exponent_ = 0.0)
      : alpha(alpha_), c(c_), cluster_exponent(cluster_exponent_) {
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw std::invalid_argument("ScalingRegime: alpha in [0, 1) violated");
    if (!(c > 0.0)) throw std::invalid_argument("ScalingRegime: c > 0 violated");
  }

  double gamma() const noexcept { return alpha - cluster_exponent; }
};

inline double derive_erasure(const ScalingRegime& regime, std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("derive_erasure: n positive violated");
  double eps = 1.0 - regime.c * std::pow(static_cast<double>(n), -regime.alpha);
  if (!(eps >= 0.0))
    throw std::invalid_argument(
        "derive_erasure: c <= n^alpha violated (epsilon = 1 - c/n^alpha < 0)");
  if (!(eps < 1.0))
    throw std::invalid_argument("derive_erasure: epsilon < 1 violated");
  return eps;
}

// Effective cluster exponent gap at a concrete grid point.
inline double gamma_at(double alpha, std::int64_t k, std::int64_t n) noexcept {
  return alpha - std::log(static_cast<double>(k)) / std::log(static_cast<double>(n));
}

// ------------------------------------------------------------ ground truth --

struct GroundTruth {
  std::int64_t n = 0;
  std::int64_t r = 0;
  std::int64_t k = 0;
  std::vector<std::uint8_t> block_values;  // r*r, row-major, entries 0/1
  std::vector<std::int32_t> row_block;     // length n, values in [0, r)
  std::vector<std::int32_t> col_block;     // length n, values in [0, r)

  int block_value(std::int64_t bi, std::int64_t bj) const noexcept {
    return block_values[static_cast<std::size_t>(bi * r + bj)];
  }
  // X(i, j) without bounds checks; hot-path form of reconstruct_entry.
  int entry(std::int64_t i, std::int64_t j) const noexcept {
    return block_value(row_block[static_cast<std::size_t>(i)],
                       col_block[static_cast<std::size_t>(j)]);
  }
};

inline int reconstruct_entry(const GroundTruth& gt, std::int64_t row, std::int64_t col) {
  if (row < 0 || row >= gt.n || col < 0 || col >= gt.n)
    throw std::out_of_range("reconstruct_entry: index out of range");
  return gt.entry(row, col);
}

// Balanced assignment: each block id exactly k times, uniformly shuffled.
inline std::vector<std::int32_t> balanced_assignment(std::int64_t r, std::int64_t k,
                                                     Rng& rng) {
  std::vector<std::int32_t> a(static_cast<std::size_t>(r * k));
  for (std::int64_t b = 0; b < r; ++b)
    for (std::int64_t t = 0; t < k; ++t)
      a[static_cast<std::size_t>(b * k + t)] = static_cast<std::int32_t>(b);
  rng.shuffle(a);
  return a;
}

inline GroundTruth generate_truth(const ModelParams& params, Rng& rng) {
  GroundTruth gt;
  gt.n = params.n;
  gt.r = params.r;
  gt.k = params.k;
  gt.block_values.resize(static_cast<std::size_t>(params.r * params.r));
  for (auto& v : gt.block_values) v = static_cast<std::uint8_t>(rng.next() >> 63);
  gt.row_block = balanced_assignment(params.r, params.k, rng);
  gt.col_block = balanced_assignment(params.r, params.k, rng);
  return gt;
}

// Full n*n expansion (tests, tiny-instance enumeration; not for the hot path).
inline std::vector<std::uint8_t> materialize(const GroundTruth& gt) {
  std::vector<std::uint8_t> x(static_cast<std::size_t>(gt.n * gt.n));
  for (std::int64_t i = 0; i < gt.n; ++i)
    for (std::int64_t j = 0; j < gt.n; ++j)
      x[static_cast<std::size_t>(i * gt.n + j)] = static_cast<std::uint8_t>(gt.entry(i, j));
  return x;
}

}  // namespace localpop
