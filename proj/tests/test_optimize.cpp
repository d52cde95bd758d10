#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qkelly/core.hpp"
#include "qkelly/optimize.hpp"

using namespace qkelly;

TEST(OptimizeAlpha, FindsBisectorOfSpinUpProbability) {
  for (double deg : {7.5, 30.0, 60.0, 90.0}) {
    const Angle d = Angle::degrees(deg);
    const auto best = optimize_alpha([&](Angle a) { return spin_up_prob(Prior(0.5), a, d); }, AlphaSearch{});
    if (deg == 90.0) {
      // every angle is equally good; the smallest coarse angle wins
      EXPECT_EQ(best.angle.rad(), 0.0);
      continue;
    }
    EXPECT_NEAR(best.angle.rad(), d.rad() / 2, 1e-7);
    EXPECT_NEAR(best.value, std::pow(std::cos(d.rad() / 2), 2), 1e-15);
  }
}

TEST(OptimizeAlpha, ConstantObjectiveReturnsZero) {
  const auto best = optimize_alpha([](Angle) { return 3.0; }, AlphaSearch{});
  EXPECT_EQ(best.angle.rad(), 0.0);
  EXPECT_EQ(best.value, 3.0);
}

TEST(OptimizeAlpha, TwinMaximaResolveToSmallerAngle) {
  // peaks at 0.4 and 0.4 + pi/2 with equal height
  auto f = [](Angle a) { return std::cos(4.0 * (a.rad() - 0.4)); };
  const auto best = optimize_alpha(f, AlphaSearch{});
  EXPECT_NEAR(best.angle.rad(), 0.4, 1e-7);
}

TEST(OptimizeAlpha, EntropyDropAtEvenPrior) {
  const Angle d = Angle::degrees(50);
  const auto best = optimize_alpha([&](Angle a) { return expected_entropy_reduction(Prior(0.5), a, d); }, AlphaSearch{});
  const double gap = std::min(oracle::axis_gap(best.angle.rad(), d.rad() / 2 + pi / 4),
                              oracle::axis_gap(best.angle.rad(), d.rad() / 2 - pi / 4));
  EXPECT_LT(gap, 1e-6);
}

TEST(OptimizeAlpha, NarrowPeakBetweenCoarseNodes) {
  // a peak narrower than the coarse spacing still lands in the right bracket
  auto f = [](Angle a) { return -std::pow(a.rad() - 1.2345, 2) + 0.1 * std::cos(2 * a.rad()); };
  const auto best = optimize_alpha(f, AlphaSearch{});
  const auto ref = oracle::scan_max([&](double x) { return f(Angle::radians(x)); }, 0, pi, 1000000);
  EXPECT_NEAR(best.value, ref.value, 1e-12);
  EXPECT_NEAR(best.angle.rad(), ref.x, 1e-6);
}

TEST(OptimizeAlpha, RejectsBadSettings) {
  EXPECT_THROW(optimize_alpha([](Angle) { return 0.0; }, AlphaSearch{4, 1e-10}), InvalidArgument);
  EXPECT_THROW(optimize_alpha([](Angle) { return 0.0; }, AlphaSearch{181, 0.0}), InvalidArgument);
}

TEST(PolishStationary, ReachesMachineLevelAccuracy) {
  auto f = [](Angle a) { return -std::pow(a.rad() - 0.7, 2); };
  EXPECT_NEAR(polish_stationary(f, Angle::radians(0.7 + 3e-8)).rad(), 0.7, 1e-10);
  // a start that is not near a maximum is returned unchanged
  EXPECT_EQ(polish_stationary(f, Angle::radians(1.5)).rad(), 1.5);
}
