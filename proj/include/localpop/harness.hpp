#pragma once

// Monte Carlo estimation of the recommendation bit error rate, parameter
// sweeps, and statistical reporting.
//
// Determinism contract: one master seed drives everything. Sweep point i
// derives master mix_pair(master, i); trial t within a point runs on
// Seed{point_master, stream + t}. Accumulators are integers merged by
// commutative addition, and every derived statistic is computed from the
// merged totals, so results are byte-identical for any worker count and
// any scheduling order.
//
// The error rate is estimated conditional on a recommendation being made:
// trials whose target row has no erased column are counted as skipped and
// excluded from the denominator.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "localpop/channel.hpp"
#include "localpop/filter.hpp"
#include "localpop/model.hpp"
#include "localpop/rng.hpp"
#include "localpop/theory.hpp"

namespace localpop {

// ---------------------------------------------------------------- wilson --

// Inverse standard normal CDF: Acklam's rational approximation polished by
// one Halley step through erfc, giving near machine precision.
inline double probit(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("probit: q in (0, 1) violated");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (q < p_low) {
    double u = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (q <= 1.0 - p_low) {
    double u = q - 0.5, t = u * u;
    x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
        (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
  } else {
    double u = std::sqrt(-2.0 * std::log1p(-q));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  // Halley refinement: e = Phi(x) - q.
  double e = 0.5 * std::erfc(-x * 0x1.6a09e667f3bcdp-1) - q;
  double u = e * 2.5066282746310002 * std::exp(0.5 * x * x);  // e / phi(x)
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(std::int64_t errors, std::int64_t trials,
                                                 double confidence) {
  if (trials < 1) throw std::invalid_argument("wilson_interval: trials >= 1 violated");
  if (errors < 0 || errors > trials)
    throw std::invalid_argument("wilson_interval: 0 <= errors <= trials violated");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("wilson_interval: confidence in (0, 1) violated");
  double z = probit(0.5 + confidence / 2.0);
  double nn = static_cast<double>(trials);
  double ph = static_cast<double>(errors) / nn;
  double z2 = z * z;
  double den = 1.0 + z2 / nn;
  double center = (ph + z2 / (2.0 * nn)) / den;
  double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / den;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// ---------------------------------------------------------------- results --

struct BEREstimate {
  std::int64_t trials = 0;   // recommendation-made trials only
  std::int64_t errors = 0;
  std::int64_t skipped = 0;  // no-erased-column trials; trials + skipped = requested
  double ber = 0.0;          // errors / trials
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.99;
};

struct PointStats {
  BEREstimate est;
  double purity_mean = 0.0;      // mean fraction of the top set in the target's block
  double purity_all_good = 0.0;  // fraction of trials capturing all min(T, k-1) good rows
  double ones_mean = 0.0;        // mean Ones in the chosen column over the top set
  double zeros_mean = 0.0;
};

struct AllTrialsSkipped : std::runtime_error {
  AllTrialsSkipped()
      : std::runtime_error(
            "AllTrialsSkipped: no trial produced an erased column in the target row") {}
};

// ------------------------------------------------------------- trial loop --

struct RunSettings {
  std::int64_t trials = 1000;
  Seed seed;
  TiePolicy tie = LowestIndex{};
  double confidence = 0.99;
  int threads = 1;
  bool freeze_truth = false;  // one truth for all trials (channel still resampled)
};

namespace detail {

struct TrialAccumulator {
  std::int64_t done = 0, skipped = 0, errors = 0;
  std::int64_t good_sum = 0, all_good = 0;
  std::int64_t ones_sum = 0, zeros_sum = 0;

  void merge(const TrialAccumulator& o) noexcept {
    done += o.done;
    skipped += o.skipped;
    errors += o.errors;
    good_sum += o.good_sum;
    all_good += o.all_good;
    ones_sum += o.ones_sum;
    zeros_sum += o.zeros_sum;
  }
};

// Stream id reserved for a frozen truth so it never collides with a trial.
inline constexpr std::uint64_t kFrozenTruthStream = ~0ULL;

}  // namespace detail

inline PointStats run_point(const ModelParams& params, std::int64_t T,
                            const RunSettings& rs) {
  if (rs.trials < 1) throw std::invalid_argument("run_point: trials >= 1 violated");
  if (T < 1 || T > params.n - 1)
    throw std::invalid_argument("run_point: T <= n-1 violated");
  if (is_expected_over_ties(rs.tie))
    throw std::invalid_argument("run_point: ExpectedOverTies needs an enumeration context");

  GroundTruth frozen;
  if (rs.freeze_truth) {
    Rng frng(Seed{rs.seed.master, detail::kFrozenTruthStream});
    frozen = generate_truth(params, frng);
  }

  const std::int64_t min_good = std::min<std::int64_t>(T, params.k - 1);
  const int n_workers = std::max(1, rs.threads);
  const std::int64_t chunk =
      std::clamp<std::int64_t>(rs.trials / (static_cast<std::int64_t>(n_workers) * 8), 1,
                               4096);

  std::atomic<std::int64_t> cursor{0};
  std::vector<detail::TrialAccumulator> parts(static_cast<std::size_t>(n_workers));
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto work = [&](int widx) {
    detail::TrialAccumulator& acc = parts[static_cast<std::size_t>(widx)];
    Observation obs;
    ChannelWorkspace cws;
    FilterWorkspace fws;
    GroundTruth gt;
    try {
      for (;;) {
        std::int64_t lo = cursor.fetch_add(chunk, std::memory_order_relaxed);
        if (lo >= rs.trials) break;
        std::int64_t hi = std::min(rs.trials, lo + chunk);
        for (std::int64_t t = lo; t < hi; ++t) {
          Rng rng(Seed{rs.seed.master, rs.seed.stream + static_cast<std::uint64_t>(t)});
          const GroundTruth* truth;
          if (rs.freeze_truth) {
            truth = &frozen;
          } else {
            gt = generate_truth(params, rng);
            truth = &gt;
          }
          generate_observation(*truth, params.p, params.epsilon, rng, obs, cws);
          TiePolicy tie = rs.tie;
          if (const auto* rsd = std::get_if<RandomSeeded>(&tie))
            tie = RandomSeeded{mix_pair(rsd->seed, static_cast<std::uint64_t>(t))};
          auto trace = recommend_into(obs, 0, T, tie, fws);
          ++acc.done;
          if (!trace) {
            ++acc.skipped;
            continue;
          }
          acc.errors += score(*truth, *trace);
          std::int64_t good = good_neighbor_count(*truth, 0, trace->top_set);
          acc.good_sum += good;
          acc.all_good += (good == min_good) ? 1 : 0;
          acc.ones_sum += trace->ones_count;
          acc.zeros_sum += trace->zeros_count;
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (n_workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  detail::TrialAccumulator total;
  for (const auto& part : parts) total.merge(part);

  std::int64_t made = total.done - total.skipped;
  if (made == 0) throw AllTrialsSkipped{};

  PointStats ps;
  ps.est.trials = made;
  ps.est.errors = total.errors;
  ps.est.skipped = total.skipped;
  ps.est.ber = static_cast<double>(total.errors) / static_cast<double>(made);
  ps.est.confidence = rs.confidence;
  auto [lo, hi] = wilson_interval(total.errors, made, rs.confidence);
  ps.est.ci_low = lo;
  ps.est.ci_high = hi;
  ps.purity_mean = static_cast<double>(total.good_sum) /
                   (static_cast<double>(T) * static_cast<double>(made));
  ps.purity_all_good = static_cast<double>(total.all_good) / static_cast<double>(made);
  ps.ones_mean = static_cast<double>(total.ones_sum) / static_cast<double>(made);
  ps.zeros_mean = static_cast<double>(total.zeros_sum) / static_cast<double>(made);
  return ps;
}

inline BEREstimate estimate_ber(const ModelParams& params, std::int64_t T,
                                std::int64_t trials, Seed seed, const TiePolicy& tie,
                                double confidence = 0.99, int threads = 1) {
  RunSettings rs;
  rs.trials = trials;
  rs.seed = seed;
  rs.tie = tie;
  rs.confidence = confidence;
  rs.threads = threads;
  return run_point(params, T, rs).est;
}

inline std::pair<double, double> purity_stats(const ModelParams& params, std::int64_t T,
                                              std::int64_t trials, Seed seed,
                                              const TiePolicy& tie = LowestIndex{},
                                              double confidence = 0.99, int threads = 1) {
  RunSettings rs;
  rs.trials = trials;
  rs.seed = seed;
  rs.tie = tie;
  rs.confidence = confidence;
  rs.threads = threads;
  PointStats ps = run_point(params, T, rs);
  return {ps.purity_mean, ps.purity_all_good};
}

// ------------------------------------------------------------------ sweep --

struct TRule {
  bool equals_k = false;
  std::int64_t fixed = 1;
  static TRule EqualsK() { return {true, 0}; }
  static TRule Fixed(std::int64_t T) { return {false, T}; }
};

struct GridEntry {
  std::int64_t k = 1, r = 1;
  double alpha = 0.0, c = 1.0, p = 0.0;
  TRule t_rule;
};

struct SweepPoint {
  std::int64_t n = 0, k = 0, r = 0, T = 0;
  double alpha = 0.0, c = 0.0, gamma = 0.0, p = 0.0, epsilon = 0.0;
  PointStats stats;
  double lower_bound = 0.0;
  std::string status;  // "ok" or a short error code
};

inline std::vector<SweepPoint> sweep(const std::vector<GridEntry>& grid,
                                     std::int64_t trials, Seed seed,
                                     const TiePolicy& tie = LowestIndex{},
                                     double confidence = 0.95, int threads = 1) {
  std::vector<SweepPoint> out;
  out.reserve(grid.size());
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const GridEntry& e = grid[idx];
    SweepPoint pt;
    pt.k = e.k;
    pt.r = e.r;
    pt.n = e.k * e.r;
    pt.alpha = e.alpha;
    pt.c = e.c;
    pt.p = e.p;
    pt.T = e.t_rule.equals_k ? e.k : e.t_rule.fixed;
    pt.gamma = gamma_at(e.alpha, e.k, pt.n);
    pt.status = "ok";
    try {
      ScalingRegime regime(e.alpha, e.c);
      pt.epsilon = derive_erasure(regime, pt.n);
      ModelParams params(pt.n, e.k, e.r, e.p, pt.epsilon);
      pt.lower_bound =
          (pt.gamma > 0.0 && pt.p < 0.5) ? theorem1_lower_bound(pt.p, pt.gamma) : 0.0;
      RunSettings rs;
      rs.trials = trials;
      rs.seed = Seed{mix_pair(seed.master, static_cast<std::uint64_t>(idx)), seed.stream};
      rs.tie = tie;
      rs.confidence = confidence;
      rs.threads = threads;
      pt.stats = run_point(params, pt.T, rs);
    } catch (const AllTrialsSkipped&) {
      pt.status = "AllTrialsSkipped";
    } catch (const std::invalid_argument&) {
      pt.status = "InvalidParams";
    }
    out.push_back(std::move(pt));
  }
  return out;
}

// -------------------------------------------------------------- csv output --

// Shortest round-trip decimal rendering; re-parsing and re-serializing any
// emitted number reproduces it byte-for-byte.
inline std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt_int(std::int64_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt_uint(std::uint64_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kSweepCsvHeader =
    "n,k,r,alpha,c,gamma,p,epsilon,T,trials,errors,skipped,ber,ci_low,ci_high,"
    "purity_mean,purity_all_good,ones_mean,zeros_mean,lower_bound,seed,status";

inline std::string sweep_csv_row(const SweepPoint& pt, std::uint64_t seed_master) {
  std::string row;
  row += fmt_int(pt.n);
  row += ',';
  row += fmt_int(pt.k);
  row += ',';
  row += fmt_int(pt.r);
  row += ',';
  row += fmt_double(pt.alpha);
  row += ',';
  row += fmt_double(pt.c);
  row += ',';
  row += fmt_double(pt.gamma);
  row += ',';
  row += fmt_double(pt.p);
  row += ',';
  row += fmt_double(pt.epsilon);
  row += ',';
  row += fmt_int(pt.T);
  row += ',';
  row += fmt_int(pt.stats.est.trials);
  row += ',';
  row += fmt_int(pt.stats.est.errors);
  row += ',';
  row += fmt_int(pt.stats.est.skipped);
  row += ',';
  row += fmt_double(pt.stats.est.ber);
  row += ',';
  row += fmt_double(pt.stats.est.ci_low);
  row += ',';
  row += fmt_double(pt.stats.est.ci_high);
  row += ',';
  row += fmt_double(pt.stats.purity_mean);
  row += ',';
  row += fmt_double(pt.stats.purity_all_good);
  row += ',';
  row += fmt_double(pt.stats.ones_mean);
  row += ',';
  row += fmt_double(pt.stats.zeros_mean);
  row += ',';
  row += fmt_double(pt.lower_bound);
  row += ',';
  row += fmt_uint(seed_master);
  row += ',';
  row += pt.status;
  return row;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points,
                             std::uint64_t seed_master) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  for (const auto& pt : points) {
    out += sweep_csv_row(pt, seed_master);
    out += '\n';
  }
  return out;
}

}  // namespace localpop
