#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qkelly/core.hpp"

using namespace qkelly;

namespace {

struct Triple {
  double xi, alpha, delta;
};

std::vector<Triple> random_triples(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Triple> out;
  for (int i = 0; i < n; ++i) out.push_back({u01(gen), pi * u01(gen), 0.5 * pi * u01(gen)});
  return out;
}

}  // namespace

TEST(Angle, CanonicalisesModPi) {
  EXPECT_DOUBLE_EQ(Angle::radians(pi + 0.25).rad(), 0.25);
  EXPECT_DOUBLE_EQ(Angle::radians(-0.25).rad(), pi - 0.25);
  EXPECT_EQ(Angle::radians(pi).rad(), 0.0);
  EXPECT_NEAR(Angle::radians(7 * pi + 0.5).rad(), 0.5, 1e-12);
  EXPECT_NEAR(Angle::degrees(30).rad(), pi / 6, 1e-15);
  EXPECT_THROW(Angle::radians(std::nan("")), InvalidArgument);
  EXPECT_NEAR(axis_distance(Angle::radians(0.1), Angle::radians(pi - 0.1)), 0.2, 1e-15);
}

TEST(Prior, RejectsOutsideUnitInterval) {
  EXPECT_THROW(Prior(-0.1), InvalidArgument);
  EXPECT_THROW(Prior(1.5), InvalidArgument);
  EXPECT_THROW(Wealth(0.0), InvalidArgument);
  EXPECT_NO_THROW(Prior(0.0));
  EXPECT_NO_THROW(Prior(1.0));
}

TEST(GameParams, ValidatesRanges) {
  EXPECT_THROW(GameParams::from_degrees(91, 3, 0.5), InvalidArgument);
  EXPECT_THROW(GameParams::from_degrees(30, 0, 0.5), InvalidArgument);
  EXPECT_TRUE(GameParams::from_degrees(0, 3, 0.5).degenerate());
}

TEST(SpinUpProb, MatchesDirectFormula) {
  for (const auto& t : random_triples(500, 7)) {
    const double p = spin_up_prob(Prior(t.xi), Angle::radians(t.alpha), Angle::radians(t.delta));
    EXPECT_NEAR(p, oracle::p_up(t.xi, t.alpha, t.delta), 1e-14);
  }
}

TEST(SpinUpProb, KnownValues) {
  EXPECT_NEAR(spin_up_prob(Prior(0.5), Angle::radians(pi / 6), Angle::radians(pi / 3)), 0.75, 1e-15);
  EXPECT_NEAR(spin_up_prob(Prior(1.0), Angle::radians(0.0), Angle::radians(1.0)), 1.0, 0.0);
  EXPECT_NEAR(spin_up_prob(Prior(0.5), Angle::radians(0.3), Angle::radians(pi / 2)), 0.5, 1e-15);
}

TEST(Posterior, IsAMartingale) {
  for (const auto& t : random_triples(1000, 11)) {
    const Prior xi(t.xi);
    const Angle a = Angle::radians(t.alpha), d = Angle::radians(t.delta);
    const double p = spin_up_prob(xi, a, d);
    if (p < 1e-12 || p > 1 - 1e-12) continue;
    const double up = posterior(xi, a, d, Outcome::Up).value();
    const double down = posterior(xi, a, d, Outcome::Down).value();
    EXPECT_NEAR(p * up + (1 - p) * down, t.xi, 1e-12);
    EXPECT_NEAR(up, oracle::xi_up(t.xi, t.alpha, t.delta), 1e-12);
    EXPECT_NEAR(down, oracle::xi_down(t.xi, t.alpha, t.delta), 1e-12);
  }
}

TEST(Posterior, MirrorSymmetry) {
  for (const auto& t : random_triples(1000, 13)) {
    const double lhs = spin_up_prob(Prior(t.xi), Angle::radians(t.alpha), Angle::radians(t.delta));
    const double rhs = spin_up_prob(Prior(1 - t.xi), Angle::radians(t.delta - t.alpha), Angle::radians(t.delta));
    EXPECT_NEAR(lhs, rhs, 1e-14);
  }
}

TEST(Posterior, BisectorAngleLeavesPriorUnchanged) {
  for (const auto& t : random_triples(200, 17)) {
    const Angle a = Angle::radians(t.delta / 2), d = Angle::radians(t.delta);
    EXPECT_NEAR(posterior(Prior(t.xi), a, d, Outcome::Up).value(), t.xi, 1e-14);
    if (t.delta > 1e-6) EXPECT_NEAR(posterior(Prior(t.xi), a, d, Outcome::Down).value(), t.xi, 1e-12);
  }
}

TEST(Posterior, ImpossibleOutcomeThrows) {
  EXPECT_THROW(posterior(Prior(1.0), Angle::radians(0.0), Angle::degrees(30), Outcome::Down), ZeroProbabilityOutcome);
  EXPECT_THROW(posterior(Prior(0.5), Angle::radians(0.0), Angle::radians(0.0), Outcome::Down),
               ZeroProbabilityOutcome);
}

TEST(Kelly, FractionAndDirection) {
  auto b = kelly_decision(0.75);
  EXPECT_DOUBLE_EQ(b.fraction, 0.5);
  EXPECT_EQ(b.bet_on, BetDirection::Up);
  b = kelly_decision(0.25);
  EXPECT_DOUBLE_EQ(b.fraction, 0.5);
  EXPECT_EQ(b.bet_on, BetDirection::Down);
  EXPECT_EQ(kelly_decision(0.5).fraction, 0.0);
  EXPECT_EQ(kelly_decision(1.0).fraction, 1.0);
  EXPECT_THROW(kelly_decision(1.5), InvalidArgument);
}

TEST(Kelly, NoGridFractionBeatsKelly) {
  for (double p : {0.5, 0.55, 0.7, 0.9, 0.3, 0.05}) {
    const auto b = kelly_decision(p);
    const double win = b.bet_on == BetDirection::Up ? p : 1 - p;
    const double kelly = oracle::log_growth(win, b.fraction);
    for (int i = 0; i < 2000; ++i) EXPECT_LE(oracle::log_growth(win, i / 2000.0), kelly + 1e-12);
  }
}

TEST(ApplyBet, UpdatesWealthAndGuardsBankruptcy) {
  const RoundDecision d{Angle::radians(0.0), 0.5, BetDirection::Up};
  EXPECT_DOUBLE_EQ(apply_bet(Wealth(2.0), d, Outcome::Up).value(), 3.0);
  EXPECT_DOUBLE_EQ(apply_bet(Wealth(2.0), d, Outcome::Down).value(), 1.0);
  const RoundDecision all_in{Angle::radians(0.0), 1.0, BetDirection::Down};
  EXPECT_THROW(apply_bet(Wealth(1.0), all_in, Outcome::Up), BankruptWealth);
  EXPECT_THROW(apply_bet(Wealth(1.0), {Angle::radians(0.0), 1.2, BetDirection::Up}, Outcome::Up), InvalidArgument);
}

TEST(OneStepGrowth, EqualsOneMinusEntropy) {
  EXPECT_NEAR(one_step_growth(0.75), 0.18872187554086717, 1e-12);
  EXPECT_EQ(one_step_growth(0.5), 0.0);
  EXPECT_EQ(one_step_growth(1.0), 1.0);
  for (double p = 0.01; p < 1; p += 0.01) {
    EXPECT_NEAR(one_step_growth(p), 1 - oracle::entropy2(p), 1e-12);
    EXPECT_NEAR(one_step_growth(p), oracle::log_growth(std::max(p, 1 - p), std::fabs(2 * p - 1)), 1e-12);
  }
}

TEST(MyopicAngle, LimitsAndBisector) {
  const Angle d = Angle::degrees(40);
  EXPECT_NEAR(myopic_growth_angle(Prior(0.5), d).rad(), d.rad() / 2, 1e-12);
  EXPECT_EQ(myopic_growth_angle(Prior(1.0), d).rad(), 0.0);
  EXPECT_EQ(myopic_growth_angle(Prior(0.0), d).rad(), d.rad());
  EXPECT_EQ(myopic_growth_angle(Prior(0.3), Angle::radians(0.0)).rad(), 0.0);
  EXPECT_NEAR(myopic_growth_angle(Prior(0.5), Angle::radians(pi / 2)).rad(), pi / 4, 1e-15);
  EXPECT_THROW(myopic_growth_angle(Prior(0.5), Angle::degrees(100)), DegenerateDelta);
}

TEST(MyopicAngle, MaximisesSpinUpProbability) {
  for (double deg : {5.0, 30.0, 60.0, 89.0, 90.0}) {
    for (double xi : {0.02, 0.2, 0.45, 0.7, 0.97}) {
      const double d = deg * pi / 180;
      const auto a = myopic_growth_angle(Prior(xi), Angle::radians(d));
      const auto best = oracle::scan_max([&](double x) { return oracle::p_up(xi, x, d); }, 0, pi, 200000);
      EXPECT_NEAR(oracle::p_up(xi, a.rad(), d), best.value, 1e-12) << deg << " " << xi;
      EXPECT_LT(oracle::axis_gap(a.rad(), best.x), 1e-6) << deg << " " << xi;
    }
  }
}

TEST(InfoAngle, FormulaValues) {
  // atan(-sqrt(3)) reduced mod pi
  EXPECT_NEAR(info_gain_angle_formula(Prior(0.5), Angle::radians(pi / 3)).rad(), 2 * pi / 3, 1e-12);
  EXPECT_THROW(info_gain_angle_formula(Prior(1.0 / 3.0), Angle::radians(pi / 3)), UndefinedFormula);
  EXPECT_EQ(info_gain_angle_formula(Prior(1.0), Angle::degrees(30)).rad(), 0.0);
}

TEST(InfoAngle, NumericMaximisesEntropyDrop) {
  for (double deg : {10.0, 30.0, 60.0, 90.0}) {
    const double d = deg * pi / 180;
    const Angle num = info_gain_angle_numeric(Prior(0.5), Angle::radians(d));
    const double gap = std::min(oracle::axis_gap(num.rad(), d / 2 + pi / 4), oracle::axis_gap(num.rad(), d / 2 - pi / 4));
    EXPECT_LT(gap, 1e-9) << deg;
    EXPECT_NEAR(spin_up_prob(Prior(0.5), num, Angle::radians(d)), 0.5, 1e-10);
    for (double xi : {0.1, 0.35, 0.8}) {
      auto gain = [&](double x) {
        const double p = oracle::p_up(xi, x, d);
        return oracle::entropy2(xi) - p * oracle::entropy2(oracle::xi_up(xi, x, d)) -
               (1 - p) * oracle::entropy2(oracle::xi_down(xi, x, d));
      };
      const auto a = info_gain_angle_numeric(Prior(xi), Angle::radians(d));
      const auto best = oracle::scan_max(gain, 1e-7, pi, 200000);
      EXPECT_NEAR(gain(a.rad()), best.value, 1e-12);
    }
  }
  EXPECT_THROW(info_gain_angle_numeric(Prior(0.0), Angle::degrees(30)), DegeneratePrior);
}

TEST(EntropyReduction, BoundedByPriorEntropy) {
  for (const auto& t : random_triples(500, 19)) {
    const double r = expected_entropy_reduction(Prior(t.xi), Angle::radians(t.alpha), Angle::radians(t.delta));
    EXPECT_GE(r, -1e-12);
    EXPECT_LE(r, oracle::entropy2(t.xi) + 1e-12);
  }
}

TEST(StPetersburg, ConvergesToLnFour) {
  EXPECT_NEAR(st_petersburg_log_value(1), 0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(st_petersburg_log_value(80), std::log(4.0), 1e-14);
  EXPECT_THROW(st_petersburg_log_value(0), InvalidArgument);
}
