#include "cleradii/gasket.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cleradii/diffusion.hpp"
#include "cleradii/law.hpp"
#include "cleradii/stats.hpp"

using cleradii::Kappa;
namespace gasket = cleradii::gasket;
namespace law = cleradii::law;
namespace diff = cleradii::diffusion;
namespace stats = cleradii::stats;

TEST(SampleNested, DepthOneIsASingleExitDraw) {
  const Kappa kappa(6.0);
  const auto seq = gasket::sample_nested(kappa, 1, 99);
  ASSERT_EQ(seq.increments.size(), 1u);
  ASSERT_EQ(seq.log_cr.size(), 2u);
  const diff::SimConfig cfg(kappa, 0.0, 1e-3, 1e-9, 99);
  EXPECT_EQ(seq.increments[0], diff::sample_exit(cfg, 0).exit_time);
}

TEST(SampleNested, DecrementStructure) {
  const auto seq = gasket::sample_nested(Kappa(5.0), 30, 7);
  ASSERT_EQ(seq.log_cr.size(), 31u);
  ASSERT_EQ(seq.increments.size(), 30u);
  EXPECT_EQ(seq.log_cr[0], 0.0);
  for (std::size_t k = 1; k < seq.log_cr.size(); ++k) {
    EXPECT_GT(seq.increments[k - 1], 0.0);
    EXPECT_NEAR(seq.log_cr[k - 1] - seq.log_cr[k], seq.increments[k - 1],
                1e-11 * std::max(1.0, std::abs(seq.log_cr[k])));
  }
  EXPECT_TRUE(std::is_sorted(seq.log_cr.rbegin(), seq.log_cr.rend()));
}

TEST(SampleNested, PermutingIncrementsPreservesTheEndpoint) {
  // the terminal log conformal radius is the (exchangeable) sum of the
  // increments, so any permutation reproduces it exactly
  auto seq = gasket::sample_nested(Kappa(6.0), 40, 11);
  const double endpoint = seq.log_cr.back();
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(seq.increments.begin(), seq.increments.end(), rng);
    double acc = 0.0;
    for (double b : seq.increments) acc -= b;
    EXPECT_NEAR(acc, endpoint, 1e-12 * std::abs(endpoint));
  }
}

TEST(SampleNested, LawOfLargeNumbersSlope) {
  // mean of log_cr[depth]/depth approaches -E[B]
  const Kappa kappa(6.0);
  const std::size_t depth = 50, sequences = 200;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t s = 0; s < sequences; ++s) {
    const auto seq = gasket::sample_nested(kappa, depth, 1000 + s);
    const double slope = seq.log_cr.back() / double(depth);
    sum += slope;
    sum2 += slope * slope;
  }
  const double mean = sum / double(sequences);
  const double se = std::sqrt(
      (sum2 / double(sequences) - mean * mean) / double(sequences - 1));
  EXPECT_NEAR(mean, -law::mean(kappa), 3.0 * se);
}

TEST(SurvivalProbability, TrivialLevelGivesCertainty) {
  const auto e = gasket::survival_probability(Kappa(6.0), 1e-6, 500, 5);
  EXPECT_EQ(e.estimate, 1.0);
  EXPECT_FALSE(e.degenerate);
}

TEST(SurvivalProbability, MatchesClosedFormTail) {
  const Kappa kappa(5.0);
  for (double s : {5.0, 10.0, 20.0}) {
    const auto e = gasket::survival_probability(kappa, s, 40000, 17);
    EXPECT_NEAR(e.estimate, e.closed_form_tail,
                3.0 * e.std_error + 1e-4)
        << s;
    EXPECT_NEAR(e.closed_form_tail, 1.0 - law::cdf(kappa, s), 1e-12);
  }
}

TEST(SurvivalProbability, FlagsDegenerateEstimates) {
  const auto e = gasket::survival_probability(Kappa(6.0), 80.0, 2000, 23);
  EXPECT_TRUE(e.degenerate);  // expect ~ exp(-80 * 5/48) * 2000 << 100
}

TEST(SurvivalCurve, SharedBatchIsMonotone) {
  const auto curve =
      gasket::survival_curve(Kappa(6.0), {2.0, 5.0, 10.0, 20.0}, 20000, 29);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].estimate, curve[i - 1].estimate);
  }
}

TEST(CoveringSum, NearZeroAlphaGivesInverseSquare) {
  // alpha -> 0 makes every annulus term 1/eps, so the sum is eps^-2
  const auto est = gasket::covering_sum(Kappa(8.0 - 1e-9), 1.0 / 64.0);
  EXPECT_NEAR(est.exponent_fit, -2.0, 1e-4);
}

TEST(CoveringSum, PercolationExponentFit) {
  // fit across eps in {2^-6, ..., 2^-14}
  const auto est = gasket::covering_sum(Kappa(6.0), 1.0 / 64.0);
  const auto exps = law::gasket_exponents(Kappa(6.0));
  EXPECT_NEAR(est.exponent_fit, exps.alpha - 2.0, 0.02);
  // dimension identity: the exponent recovered from the fit gives back the
  // expectation dimension
  const double alpha_from_fit = est.exponent_fit + 2.0;
  EXPECT_NEAR(2.0 - alpha_from_fit, exps.expectation_dimension, 0.02);
}

TEST(CoveringSum, RatioToPowerLawStaysBounded) {
  const Kappa kappa(6.0);
  const double alpha = law::gasket_exponents(kappa).alpha;
  double lo = 1e300, hi = 0.0;
  for (int i = 6; i <= 14; ++i) {
    const double eps = std::pow(2.0, -double(i));
    const double ratio = gasket::covering_sum(kappa, eps).expected_disk_count /
                         std::pow(eps, alpha - 2.0);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  EXPECT_LT(hi / lo, 3.0);
}

TEST(CoveringSum, RejectsEpsilonOutsideRange) {
  EXPECT_THROW(gasket::covering_sum(Kappa(6.0), 0.5), cleradii::domain_error);
  EXPECT_THROW(gasket::covering_sum(Kappa(6.0), 0.0), cleradii::domain_error);
}

// Consistency with the exit-sample batch: the increments of sample_nested
// follow the same law as sample_exit_batch (identical sampler plumbing).
TEST(NestedConsistency, IncrementsPassTheSameKsGate) {
  const Kappa kappa(6.0);
  std::vector<double> xs;
  for (std::size_t s = 0; s < 40; ++s) {
    const auto seq = gasket::sample_nested(kappa, 100, 40000 + s);
    xs.insert(xs.end(), seq.increments.begin(), seq.increments.end());
  }
  const auto emp = stats::EmpiricalLaw::from_samples(std::move(xs), 1);
  const double ks = stats::ks_statistic(
      emp, [&](double x) { return x <= 0.0 ? 0.0 : law::cdf(kappa, x); });
  EXPECT_LT(ks, stats::ks_threshold(emp.n));
}

// Tail-exponent recovery at scale: the log survival slope matches -alpha
// within 10% at n = 1e6 for three representative kappas.  Coarser steps are
// fine here; the decay rate is insensitive to the small time bias.
TEST(TailExponent, RegressionRecoversAlphaAtScale) {
  for (double k : {3.2, 6.0, 7.5}) {
    const Kappa kappa(k);
    const double alpha = law::gasket_exponents(kappa).alpha;
    const auto curve = gasket::survival_curve(kappa, {20.0, 40.0, 60.0},
                                              1000000, 31337, /*dt_max=*/8e-3);
    std::vector<std::pair<double, double>> pts;
    for (const auto& e : curve) {
      ASSERT_FALSE(e.degenerate) << k << " s=" << e.s;
      pts.emplace_back(e.s, std::log(e.estimate));
    }
    const auto fit = stats::slope_fit(pts);
    EXPECT_NEAR(fit.slope, -alpha, 0.10 * alpha) << k;
  }
}
