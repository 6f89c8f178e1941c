#pragma once

// Closed-form quantities for the block model and its analysis: per-column
// match probabilities for same-block and cross-block row pairs, Chernoff
// bounds on the top-set selection events, the small-cluster lower bound,
// Bayes posterior error, conditional zero-probabilities, column-count
// moments, and normal/binomial tail utilities.
//
// Bounds are evaluated in log space (exponents reach +-10^9 scale inputs)
// and reported with a vacuous flag instead of being clipped at 1, so the
// raw formula values remain visible.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace localpop {

// ----------------------------------------------------- match probabilities --

// Probability that a fixed column contributes to the similarity of two rows
// in the same block: both sampled, values agree after independent flips.
inline double p_good(double epsilon, double p) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw std::invalid_argument("p_good: epsilon in [0, 1) violated");
  if (!(p >= 0.0 && p < 0.5)) throw std::invalid_argument("p_good: p in [0, 1/2) violated");
  double q = 1.0 - epsilon;
  return q * q * ((1.0 - p) * (1.0 - p) + p * p);
}

// Same for rows in different blocks: the two true values agree with
// probability 1/2, making the match probability (1-eps)^2 / 2.
inline double p_bad(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw std::invalid_argument("p_bad: epsilon in [0, 1) violated");
  double q = 1.0 - epsilon;
  return q * q / 2.0;
}

// ---------------------------------------------------------- chernoff bounds --

struct BoundInputs {
  std::int64_t n = 0, k = 0, r = 0;
  double epsilon = 0.0, p = 0.0, delta = 0.0;
};

struct BoundReport {
  double value = 0.0;      // exp(log_value); underflows to 0 gracefully
  double log_value = 0.0;  // natural log of the bound
  bool vacuous = false;    // bound >= 1, i.e. log_value >= 0
  BoundInputs inputs;
};

// Union bound on {some same-block neighbor has similarity <= n*p_g*(1-delta)}:
// k * exp(-n * p_g * delta^2 / 3).
inline BoundReport chernoff_good(std::int64_t n, std::int64_t k, double epsilon, double p,
                                 double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("chernoff_good: delta in (0, 1) violated");
  BoundReport rep;
  rep.inputs = {n, k, 0, epsilon, p, delta};
  double pg = p_good(epsilon, p);
  rep.log_value = std::log(static_cast<double>(k)) -
                  static_cast<double>(n) * pg * delta * delta / 3.0;
  rep.value = std::exp(rep.log_value);
  rep.vacuous = rep.log_value >= 0.0;
  return rep;
}

// Union + mixture-concentration bound on {some cross-block row has
// similarity >= n*p_b*(1+delta)^2}:
// (n-k) * exp(-n * p_b * delta^2 / 3) + 2r * exp(-r * delta^2 / 6).
inline BoundReport chernoff_bad(std::int64_t n, std::int64_t k, std::int64_t r,
                                double epsilon, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("chernoff_bad: delta in (0, 1) violated");
  BoundReport rep;
  rep.inputs = {n, k, r, epsilon, 0.0, delta};
  double pb = p_bad(epsilon);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double la = (n - k > 0) ? std::log(static_cast<double>(n - k)) -
                                static_cast<double>(n) * pb * delta * delta / 3.0
                          : neg_inf;
  double lb = std::log(2.0 * static_cast<double>(r)) -
              static_cast<double>(r) * delta * delta / 6.0;
  double hi = std::max(la, lb), lo = std::min(la, lb);
  rep.log_value = (hi == neg_inf) ? neg_inf : hi + std::log1p(std::exp(lo - hi));
  rep.value = std::exp(rep.log_value);
  rep.vacuous = rep.log_value >= 0.0;
  return rep;
}

// Largest delta on a 10^-4 grid keeping the same-block lower tail above the
// cross-block upper tail: p_g*(1-delta) > p_b*(1+delta)^2. Returns 0 if no
// grid point separates (p extremely close to 1/2).
inline double separation_delta(double epsilon, double p) {
  double pg = p_good(epsilon, p);
  double pb = p_bad(epsilon);
  constexpr double step = 1e-4;
  for (int i = 9999; i >= 1; --i) {
    double d = i * step;
    if (pg * (1.0 - d) > pb * (1.0 + d) * (1.0 + d)) return d;
  }
  return 0.0;
}

// ------------------------------------------------------- small-cluster bound --

// Asymptotic error floor p^m / (p^m + (1-p)^m) with m = floor(1/gamma);
// evaluated through the logit to stay stable when m is huge.
inline double theorem1_lower_bound(double p, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("theorem1_lower_bound: gamma > 0 violated");
  if (!(p >= 0.0 && p < 0.5))
    throw std::invalid_argument("theorem1_lower_bound: p in [0, 1/2) violated");
  if (p == 0.0) return 0.0;
  double m = std::floor(1.0 / gamma);
  double t = m * (std::log1p(-p) - std::log(p));  // m*log((1-p)/p) >= 0
  double e = std::exp(-t);
  return e / (1.0 + e);
}

// ---------------------------------------------------------- bayes posterior --

// Posterior probability that the true column value is 0 given `ones` votes
// for 1 and `zeros` votes for 0 under symmetric flips:
// p^d / (p^d + (1-p)^d) with d = ones - zeros. Depends only on d.
inline double posterior_error(std::int64_t ones, std::int64_t zeros, double p) {
  if (ones < 0 || zeros < 0)
    throw std::invalid_argument("posterior_error: counts non-negative violated");
  if (!(p >= 0.0 && p < 0.5))
    throw std::invalid_argument("posterior_error: p in [0, 1/2) violated");
  std::int64_t d = ones - zeros;
  if (p == 0.0) {
    if (d > 0) return 0.0;
    if (d < 0) return 1.0;
    return 0.5;
  }
  double t = static_cast<double>(d) * (std::log1p(-p) - std::log(p));
  if (t >= 0.0) {
    double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// ------------------------------------------------------ conditional zeroes --

// Probability that an entry is Zero given it is not One, in a column whose
// true value is `truth`:
//   truth = 1:  p(1-eps) / (p(1-eps) + eps)
//   truth = 0:  (1-p)(1-eps) / ((1-p)(1-eps) + eps)
// At eps = 0 every non-One entry is a Zero, so the formula gives 1 whenever
// the numerator is positive; the degenerate 0/0 case (p = 0, eps = 0,
// truth = 1: "not One" has probability zero) returns 0.
inline double p_zero_given_truth(double p, double epsilon, int truth) {
  if (!(p >= 0.0 && p < 0.5))
    throw std::invalid_argument("p_zero_given_truth: p in [0, 1/2) violated");
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw std::invalid_argument("p_zero_given_truth: epsilon in [0, 1) violated");
  if (truth != 0 && truth != 1)
    throw std::invalid_argument("p_zero_given_truth: truth in {0, 1} violated");
  double zp = (truth == 1 ? p : 1.0 - p) * (1.0 - epsilon);
  double den = zp + epsilon;
  if (den == 0.0) return 0.0;
  return zp / den;
}

// ----------------------------------------------------------- column moments --

struct ColumnMoments {
  double mu = 0.0;
  double sigma = 0.0;
};

// Count of unerased Ones among k entries of a true-1 column: Binomial(k, q)
// with q = (1-eps)(1-p).
inline ColumnMoments column_ones_moments(std::int64_t k, double epsilon, double p) {
  if (k < 0) throw std::invalid_argument("column_ones_moments: k >= 0 violated");
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw std::invalid_argument("column_ones_moments: epsilon in [0, 1) violated");
  if (!(p >= 0.0 && p < 0.5))
    throw std::invalid_argument("column_ones_moments: p in [0, 1/2) violated");
  double q = (1.0 - epsilon) * (1.0 - p);
  double var = static_cast<double>(k) * q * (1.0 - q);
  return {static_cast<double>(k) * q, std::sqrt(var)};
}

// ---------------------------------------------------------------- q tail --

// Standard normal upper tail Q(t). erfc-based; relative accuracy a few ulp
// throughout the normal range, with graceful underflow past t ~ 38.5 where
// the result leaves double range (see log_q_tail for those regimes).
inline double q_tail(double t) { return 0.5 * std::erfc(t * 0x1.6a09e667f3bcdp-1); }

// log Q(t), accurate for all t (including where Q underflows): erfc-based
// for moderate t, continued-fraction Mills ratio for large t (the fraction
// converges geometrically once t^2 dominates the level index).
inline double log_q_tail(double t) {
  if (t < 30.0) return std::log(q_tail(t));
  // Q(t) = phi(t) * cf, cf = 1/(t + 1/(t + 2/(t + 3/(t + ...)))).
  double cf = 0.0;
  for (int k = 64; k >= 1; --k) cf = static_cast<double>(k) / (t + cf);
  cf = 1.0 / (t + cf);
  constexpr double half_log_2pi = 0.9189385332046727;
  return -0.5 * t * t - half_log_2pi + std::log(cf);
}

// ------------------------------------------------------------ binomial tail --

// Exact Pr[X > threshold] for X ~ Binomial(n, p), by log-space term
// summation from the small end of whichever side is shorter.
inline double binomial_tail(std::int64_t n, double p, std::int64_t threshold) {
  if (n < 0) throw std::invalid_argument("binomial_tail: n >= 0 violated");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binomial_tail: p in [0, 1] violated");
  if (threshold < 0 || threshold > n)
    throw std::invalid_argument("binomial_tail: threshold in [0, n] violated");
  if (threshold == n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  const long double lp = std::log(static_cast<long double>(p));
  const long double lq = std::log1p(-static_cast<long double>(p));
  const long double lgn = std::lgamma(static_cast<long double>(n) + 1.0L);
  auto log_pmf = [&](std::int64_t i) {
    return lgn - std::lgamma(static_cast<long double>(i) + 1.0L) -
           std::lgamma(static_cast<long double>(n - i) + 1.0L) +
           static_cast<long double>(i) * lp + static_cast<long double>(n - i) * lq;
  };

  // Upper side has n - threshold terms, lower side threshold + 1.
  if (n - threshold <= threshold + 1) {
    long double acc = 0.0L;  // terms shrink away from the mode: sum far end first
    for (std::int64_t i = n; i > threshold; --i) acc += std::exp(log_pmf(i));
    return static_cast<double>(acc);
  }
  long double acc = 0.0L;
  for (std::int64_t i = 0; i <= threshold; ++i) acc += std::exp(log_pmf(i));
  return static_cast<double>(1.0L - acc);
}

}  // namespace localpop
