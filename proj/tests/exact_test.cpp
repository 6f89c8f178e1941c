#include "localpop/exact.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "localpop/harness.hpp"

namespace localpop {
namespace {

GroundTruth frozen_truth(std::int64_t n, std::int64_t k, std::uint8_t fill) {
  GroundTruth gt;
  gt.n = n;
  gt.k = k;
  gt.r = n / k;
  gt.block_values.assign(static_cast<std::size_t>(gt.r * gt.r), fill);
  gt.row_block.resize(static_cast<std::size_t>(n));
  gt.col_block.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    gt.row_block[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i / k);
    gt.col_block[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i / k);
  }
  return gt;
}

// ---- unconditional enumeration ----------------------------------------

TEST(ExactUnconditional, TinyInstancesAverageToOneHalf) {
  struct Case {
    std::int64_t n, k, r, T;
    double p, eps;
  };
  const Case cases[] = {
      {2, 1, 2, 1, 0.0, 0.5},  {2, 1, 2, 1, 0.25, 0.5}, {2, 1, 2, 1, 0.25, 0.8},
      {2, 2, 1, 1, 0.25, 0.5}, {3, 1, 3, 2, 0.25, 0.5}, {3, 3, 1, 2, 0.25, 0.5},
      {3, 1, 3, 1, 0.1, 0.6},
  };
  for (const auto& c : cases) {
    ModelParams params(c.n, c.k, c.r, c.p, c.eps);
    ExactResult res = exact_ber_unconditional_detail(params, c.T);
    ASSERT_NEAR(res.pe, 0.5, 1e-12) << "n=" << c.n << " k=" << c.k << " p=" << c.p;
    ASSERT_NEAR(res.total_mass, 1.0, 1e-12);
    // row 0 recommendation is skipped exactly when no entry is erased
    ASSERT_NEAR(res.skip_mass, std::pow(1.0 - c.eps, static_cast<double>(c.n)), 1e-12);
    ASSERT_NEAR(res.pe, res.err_mass / (1.0 - res.skip_mass), 1e-15);
  }
}

TEST(ExactUnconditional, WrapperMatchesDetail) {
  ModelParams params(2, 1, 2, 0.25, 0.5);
  EXPECT_DOUBLE_EQ(exact_ber_unconditional(params, 1),
                   exact_ber_unconditional_detail(params, 1).pe);
}

// ---- frozen-truth enumeration ------------------------------------------

TEST(ExactFrozen, AllOnesTruthNeverErrs) {
  ModelParams params(3, 1, 3, 0.3, 0.5);
  ExactResult res = exact_ber_detail(params, 2, frozen_truth(3, 1, 1));
  EXPECT_DOUBLE_EQ(res.pe, 0.0);
  EXPECT_DOUBLE_EQ(res.err_mass, 0.0);
  EXPECT_NEAR(res.total_mass, 1.0, 1e-12);
}

TEST(ExactFrozen, AllZerosTruthAlwaysErrs) {
  ModelParams params(2, 1, 2, 0.3, 0.5);
  ExactResult res = exact_ber_detail(params, 1, frozen_truth(2, 1, 0));
  EXPECT_NEAR(res.pe, 1.0, 1e-12);
}

TEST(ExactFrozen, MixedTruthStaysInRange) {
  ModelParams params(2, 1, 2, 0.1, 0.5);
  GroundTruth gt = frozen_truth(2, 1, 0);
  gt.block_values = {1, 0, 0, 1};  // target row (1, 0)
  ExactResult res = exact_ber_detail(params, 1, gt);
  EXPECT_GT(res.pe, 0.0);
  EXPECT_LT(res.pe, 1.0);
  EXPECT_NEAR(res.total_mass, 1.0, 1e-12);
  // swapping both columns of the truth relabels the instance, so the error
  // is unchanged (the pipeline is column-permutation equivariant)
  GroundTruth swapped = gt;
  swapped.block_values = {0, 1, 1, 0};
  ExactResult res2 = exact_ber_detail(params, 1, swapped);
  EXPECT_NEAR(res.err_mass, res2.err_mass, 1e-15);
  EXPECT_NEAR(res.pe, res2.pe, 1e-15);
}

// ---- agreement with the sampling estimator ------------------------------

TEST(ExactVsSampling, MonteCarloConfidenceIntervalCoversExactValue) {
  ModelParams params(2, 1, 2, 0.25, 0.5);
  double truth = exact_ber_unconditional(params, 1);
  RunSettings rs;
  rs.trials = 50000;
  rs.seed = Seed{911, 0};
  rs.tie = RandomSeeded{77};
  rs.confidence = 0.999;
  PointStats st = run_point(params, 1, rs);
  EXPECT_GE(truth, st.est.ci_low);
  EXPECT_LE(truth, st.est.ci_high);
}

// ---- validation ---------------------------------------------------------

TEST(ExactValidation, RejectsOutOfScopeInputs) {
  ModelParams big(4, 2, 2, 0.1, 0.5);
  EXPECT_THROW(exact_ber_unconditional(big, 1), std::invalid_argument);
  ModelParams ok(2, 1, 2, 0.1, 0.5);
  EXPECT_THROW(exact_ber_unconditional(ok, 0), std::invalid_argument);
  EXPECT_THROW(exact_ber_unconditional(ok, 2), std::invalid_argument);
  EXPECT_THROW(exact_ber_detail(ok, 1, frozen_truth(3, 1, 1)), std::invalid_argument);
  // eps = 0 leaves no erased column to recommend, ever
  ModelParams dense(2, 1, 2, 0.1, 0.0);
  EXPECT_THROW(exact_ber_unconditional(dense, 1), std::invalid_argument);
}

}  // namespace
}  // namespace localpop
