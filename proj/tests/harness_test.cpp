#include "localpop/harness.hpp"

#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace localpop {
namespace {

// ---- probit --------------------------------------------------------------

TEST(Probit, ReferenceValuesAndSymmetry) {
  EXPECT_DOUBLE_EQ(probit(0.5), 0.0);
  EXPECT_NEAR(probit(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(probit(0.995), 2.5758293035489004, 1e-12);
  EXPECT_NEAR(probit(0.001), -3.090232306167813, 1e-12);
  for (double q : {0.01, 0.1, 0.3, 0.45, 0.77, 0.999})
    ASSERT_NEAR(probit(q), -probit(1.0 - q), 1e-11) << "q=" << q;
  double prev = probit(0.01);
  for (double q = 0.05; q < 1.0; q += 0.05) {
    double cur = probit(q);
    ASSERT_GT(cur, prev);
    prev = cur;
  }
  EXPECT_THROW(probit(0.0), std::invalid_argument);
  EXPECT_THROW(probit(1.0), std::invalid_argument);
  EXPECT_THROW(probit(-0.5), std::invalid_argument);
}

// ---- wilson interval -------------------------------------------------------

TEST(WilsonInterval, ReferenceValueAndEdges) {
  auto [lo, hi] = wilson_interval(50, 100, 0.95);
  EXPECT_NEAR(lo, 0.40383153036599562, 1e-14);
  EXPECT_NEAR(hi, 0.59616846963400438, 1e-14);

  auto [zlo, zhi] = wilson_interval(0, 100, 0.95);
  EXPECT_DOUBLE_EQ(zlo, 0.0);
  EXPECT_GT(zhi, 0.0);
  EXPECT_LT(zhi, 0.05);

  auto [flo, fhi] = wilson_interval(100, 100, 0.95);
  EXPECT_DOUBLE_EQ(fhi, 1.0);
  EXPECT_GT(flo, 0.95);

  auto [mlo, mhi] = wilson_interval(7, 20, 0.9);
  EXPECT_LT(mlo, 7.0 / 20.0);
  EXPECT_GT(mhi, 7.0 / 20.0);

  EXPECT_THROW(wilson_interval(1, 0, 0.95), std::invalid_argument);
  EXPECT_THROW(wilson_interval(-1, 10, 0.95), std::invalid_argument);
  EXPECT_THROW(wilson_interval(11, 10, 0.95), std::invalid_argument);
  EXPECT_THROW(wilson_interval(5, 10, 1.0), std::invalid_argument);
}

TEST(WilsonInterval, WidthScalesAsRootN) {
  auto [lo1, hi1] = wilson_interval(500, 1000, 0.95);
  auto [lo2, hi2] = wilson_interval(1000, 2000, 0.95);
  double ratio = (hi2 - lo2) / (hi1 - lo1);
  EXPECT_NEAR(ratio, 1.0 / std::sqrt(2.0), 0.01);
  // higher confidence widens the interval
  auto [wlo, whi] = wilson_interval(500, 1000, 0.99);
  EXPECT_GT(whi - wlo, hi1 - lo1);
}

// ---- run_point ---------------------------------------------------------------

TEST(RunPoint, AccountingAndRanges) {
  ModelParams params(4, 2, 2, 0.1, 0.5);
  RunSettings rs;
  rs.trials = 2000;
  rs.seed = Seed{321, 0};
  PointStats ps = run_point(params, 1, rs);
  EXPECT_EQ(ps.est.trials + ps.est.skipped, 2000);
  EXPECT_GT(ps.est.trials, 0);
  EXPECT_GT(ps.est.skipped, 0);  // (1-eps)^4 = 6.25% of trials skip
  EXPECT_DOUBLE_EQ(ps.est.ber,
                   static_cast<double>(ps.est.errors) / static_cast<double>(ps.est.trials));
  EXPECT_LE(ps.est.ci_low, ps.est.ber);
  EXPECT_GE(ps.est.ci_high, ps.est.ber);
  EXPECT_DOUBLE_EQ(ps.est.confidence, 0.99);
  EXPECT_GE(ps.purity_mean, 0.0);
  EXPECT_LE(ps.purity_mean, 1.0);
  EXPECT_GE(ps.purity_all_good, 0.0);
  EXPECT_LE(ps.purity_all_good, 1.0);
  EXPECT_GE(ps.ones_mean, 0.0);
  EXPECT_LE(ps.ones_mean, 1.0);  // T = 1: at most one vote per trial
}

TEST(RunPoint, ThrowsWhenEveryTrialSkips) {
  ModelParams params(4, 2, 2, 0.1, 0.0);  // no erasures, nothing to recommend
  RunSettings rs;
  rs.trials = 50;
  rs.seed = Seed{5, 0};
  try {
    run_point(params, 1, rs);
    FAIL() << "expected AllTrialsSkipped";
  } catch (const AllTrialsSkipped& e) {
    EXPECT_NE(std::string(e.what()).find("AllTrialsSkipped"), std::string::npos);
  }
}

TEST(RunPoint, Validation) {
  ModelParams params(4, 2, 2, 0.1, 0.5);
  RunSettings rs;
  rs.seed = Seed{1, 0};
  rs.trials = 0;
  EXPECT_THROW(run_point(params, 1, rs), std::invalid_argument);
  rs.trials = 10;
  EXPECT_THROW(run_point(params, 0, rs), std::invalid_argument);
  EXPECT_THROW(run_point(params, 4, rs), std::invalid_argument);
  rs.tie = ExpectedOverTies{};
  EXPECT_THROW(run_point(params, 1, rs), std::invalid_argument);
}

TEST(RunPoint, DeterministicPerSeedAndSensitiveToStream) {
  ModelParams params(4, 2, 2, 0.1, 0.5);
  RunSettings rs;
  rs.trials = 2000;
  rs.seed = Seed{77, 0};
  rs.tie = RandomSeeded{13};
  PointStats a = run_point(params, 1, rs);
  PointStats b = run_point(params, 1, rs);
  EXPECT_EQ(a.est.errors, b.est.errors);
  EXPECT_EQ(a.est.skipped, b.est.skipped);
  EXPECT_DOUBLE_EQ(a.purity_mean, b.purity_mean);
  EXPECT_DOUBLE_EQ(a.ones_mean, b.ones_mean);
  EXPECT_DOUBLE_EQ(a.zeros_mean, b.zeros_mean);

  rs.seed = Seed{77, 1u << 20};
  PointStats c = run_point(params, 1, rs);
  bool all_equal = a.est.errors == c.est.errors && a.est.skipped == c.est.skipped &&
                   a.purity_mean == c.purity_mean && a.ones_mean == c.ones_mean;
  EXPECT_FALSE(all_equal);
}

TEST(RunPoint, FrozenTruthIsDeterministicAndDistinct) {
  ModelParams params(6, 3, 2, 0.1, 0.5);
  RunSettings rs;
  rs.trials = 1500;
  rs.seed = Seed{901, 0};
  rs.freeze_truth = true;
  PointStats a = run_point(params, 2, rs);
  PointStats b = run_point(params, 2, rs);
  EXPECT_EQ(a.est.errors, b.est.errors);
  EXPECT_DOUBLE_EQ(a.purity_mean, b.purity_mean);

  rs.freeze_truth = false;
  PointStats c = run_point(params, 2, rs);
  bool all_equal = a.est.errors == c.est.errors && a.est.skipped == c.est.skipped &&
                   a.purity_mean == c.purity_mean && a.ones_mean == c.ones_mean;
  EXPECT_FALSE(all_equal);
}

TEST(RunPoint, CiWidthShrinksWithTrials) {
  ModelParams params(2, 1, 2, 0.25, 0.5);
  TiePolicy tie = RandomSeeded{5};
  BEREstimate a = estimate_ber(params, 1, 4000, Seed{11, 0}, tie);
  BEREstimate b = estimate_ber(params, 1, 8000, Seed{11, 0}, tie);
  double ratio = (b.ci_high - b.ci_low) / (a.ci_high - a.ci_low);
  EXPECT_NEAR(ratio, 1.0 / std::sqrt(2.0), 0.1);
}

TEST(RunPoint, WrappersMatchFullStats) {
  ModelParams params(4, 2, 2, 0.1, 0.5);
  RunSettings rs;
  rs.trials = 800;
  rs.seed = Seed{42, 9};
  rs.confidence = 0.9;
  PointStats ps = run_point(params, 1, rs);

  BEREstimate est = estimate_ber(params, 1, 800, Seed{42, 9}, LowestIndex{}, 0.9);
  EXPECT_EQ(est.errors, ps.est.errors);
  EXPECT_EQ(est.trials, ps.est.trials);
  EXPECT_EQ(est.skipped, ps.est.skipped);
  EXPECT_DOUBLE_EQ(est.ber, ps.est.ber);
  EXPECT_DOUBLE_EQ(est.ci_low, ps.est.ci_low);
  EXPECT_DOUBLE_EQ(est.ci_high, ps.est.ci_high);

  auto [pm, pag] = purity_stats(params, 1, 800, Seed{42, 9});
  EXPECT_DOUBLE_EQ(pm, ps.purity_mean);
  EXPECT_DOUBLE_EQ(pag, ps.purity_all_good);
}

// ---- sweep -------------------------------------------------------------------

TEST(Sweep, SinglePointMatchesRunPointWithDerivedSeed) {
  GridEntry e;
  e.k = 2;
  e.r = 8;
  e.alpha = 0.5;
  e.c = 1.0;
  e.p = 0.2;
  e.t_rule = TRule::EqualsK();
  Seed master{2024, 3};
  auto pts = sweep({e}, 400, master, LowestIndex{}, 0.95);
  ASSERT_EQ(pts.size(), 1u);
  const SweepPoint& pt = pts[0];
  EXPECT_EQ(pt.n, 16);
  EXPECT_EQ(pt.T, 2);
  EXPECT_EQ(pt.status, "ok");
  EXPECT_DOUBLE_EQ(pt.epsilon, derive_erasure(ScalingRegime(0.5, 1.0), 16));
  EXPECT_DOUBLE_EQ(pt.gamma, gamma_at(0.5, 2, 16));
  EXPECT_DOUBLE_EQ(pt.lower_bound, theorem1_lower_bound(0.2, pt.gamma));

  ModelParams params(16, 2, 8, 0.2, pt.epsilon);
  RunSettings rs;
  rs.trials = 400;
  rs.seed = Seed{mix_pair(master.master, 0), master.stream};
  rs.confidence = 0.95;
  PointStats direct = run_point(params, 2, rs);
  EXPECT_EQ(pt.stats.est.errors, direct.est.errors);
  EXPECT_EQ(pt.stats.est.trials, direct.est.trials);
  EXPECT_DOUBLE_EQ(pt.stats.purity_mean, direct.purity_mean);
  EXPECT_DOUBLE_EQ(pt.stats.ones_mean, direct.ones_mean);
}

TEST(Sweep, StatusCodesPerPoint) {
  GridEntry ok;
  ok.k = 2;
  ok.r = 8;
  ok.alpha = 0.25;
  ok.c = 1.0;
  ok.p = 0.1;
  ok.t_rule = TRule::EqualsK();
  GridEntry bad_eps = ok;
  bad_eps.alpha = 0.0;
  bad_eps.c = 2.0;  // erasure would be negative
  GridEntry all_skip = ok;
  all_skip.alpha = 0.0;
  all_skip.c = 1.0;  // erasure exactly zero
  auto pts = sweep({ok, bad_eps, all_skip}, 200, Seed{9, 0});
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].status, "ok");
  EXPECT_EQ(pts[1].status, "InvalidParams");
  EXPECT_EQ(pts[2].status, "AllTrialsSkipped");
  EXPECT_EQ(pts[1].stats.est.trials, 0);

  std::string csv = sweep_csv(pts, 9);
  EXPECT_NE(csv.find("InvalidParams"), std::string::npos);
  EXPECT_NE(csv.find("AllTrialsSkipped"), std::string::npos);
}

TEST(Sweep, CsvIsByteIdenticalAcrossThreadCounts) {
  GridEntry a;
  a.k = 2;
  a.r = 8;
  a.alpha = 0.25;
  a.c = 1.0;
  a.p = 0.1;
  a.t_rule = TRule::EqualsK();
  GridEntry b;
  b.k = 4;
  b.r = 6;
  b.alpha = 0.4;
  b.c = 1.5;
  b.p = 0.05;
  b.t_rule = TRule::Fixed(3);
  Seed master{555, 0};
  auto p1 = sweep({a, b}, 600, master, RandomSeeded{3}, 0.95, 1);
  auto p4 = sweep({a, b}, 600, master, RandomSeeded{3}, 0.95, 4);
  EXPECT_EQ(sweep_csv(p1, master.master), sweep_csv(p4, master.master));

  std::string csv = sweep_csv(p1, master.master);
  std::size_t lines = 0;
  for (char ch : csv) lines += (ch == '\n');
  EXPECT_EQ(lines, 3u);  // header + 2 points
  EXPECT_EQ(csv.rfind(kSweepCsvHeader, 0), 0u);
}

// ---- csv number formatting ------------------------------------------------

TEST(CsvFormat, ShortestRoundTrip) {
  EXPECT_EQ(fmt_double(0.1), "0.1");
  EXPECT_EQ(fmt_double(1.0), "1");
  EXPECT_EQ(fmt_double(0.0), "0");
  EXPECT_EQ(fmt_int(-5), "-5");
  EXPECT_EQ(fmt_int(0), "0");
  EXPECT_EQ(fmt_uint(18446744073709551615ULL), "18446744073709551615");
  for (double v : {1.0 / 3.0, 0.1, 1e-300, 6.02e23, -0.4999999999999999}) {
    std::string s = fmt_double(v);
    double back = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), back);
    ASSERT_EQ(res.ec, std::errc());
    ASSERT_EQ(back, v) << s;
  }
}

}  // namespace
}  // namespace localpop
