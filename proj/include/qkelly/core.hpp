#pragma once

// Per-round model of the spin double-or-nothing game.
//
// Conventions: the prior xi weights the reference state at angle 0, whose
// spin-up probability under a measurement at angle alpha is cos^2(alpha); the
// alternative state sits at angle delta. Wealth utilities use log2; the
// St. Petersburg value uses the natural log.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qkelly/errors.hpp"
#include "qkelly/optimize.hpp"
#include "qkelly/types.hpp"

namespace qkelly {

namespace detail {

inline double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

/// Binary entropy in bits with 0 log 0 = 0.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Outcome probabilities and Bayes posteriors of one measurement.
struct Branching {
  double p_up = 0.0;
  double p_down = 0.0;
  double xi_up = 0.0;    // NaN when the up outcome is impossible
  double xi_down = 0.0;  // NaN when the down outcome is impossible
};

inline Branching branch(double xi, double alpha, double delta) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(delta - alpha), sb = std::sin(delta - alpha);
  const double ref_up = xi * ca * ca, alt_up = (1.0 - xi) * cb * cb;
  const double ref_down = xi * sa * sa, alt_down = (1.0 - xi) * sb * sb;
  Branching b;
  b.p_up = clamp01(ref_up + alt_up);
  b.p_down = 1.0 - b.p_up;
  const double den_up = ref_up + alt_up;
  const double den_down = ref_down + alt_down;
  b.xi_up = den_up > 0.0 ? clamp01(ref_up / den_up) : std::nan("");
  b.xi_down = den_down > 0.0 ? clamp01(ref_down / den_down) : std::nan("");
  return b;
}

inline double spin_up_prob(double xi, double alpha, double delta) {
  const double ca = std::cos(alpha), cb = std::cos(delta - alpha);
  return clamp01(xi * ca * ca + (1.0 - xi) * cb * cb);
}

}  // namespace detail

/// Probability of spin-up: xi cos^2(alpha) + (1 - xi) cos^2(delta - alpha).
inline double spin_up_prob(Prior xi, Angle alpha, Angle delta) {
  return detail::spin_up_prob(xi.value(), alpha.rad(), delta.rad());
}

/// Bayes posterior of the reference state after observing `outcome`.
inline Prior posterior(Prior xi, Angle alpha, Angle delta, Outcome outcome) {
  const auto b = detail::branch(xi.value(), alpha.rad(), delta.rad());
  const double post = outcome == Outcome::Up ? b.xi_up : b.xi_down;
  if (std::isnan(post)) throw ZeroProbabilityOutcome("posterior conditioned on an outcome of probability zero");
  return Prior(post);
}

/// Kelly bet on a double-or-nothing wager: stake |2p - 1| on the likelier outcome.
inline KellyBet kelly_decision(double p_up) {
  if (!(p_up >= 0.0 && p_up <= 1.0)) throw InvalidArgument("probability must lie in [0, 1]");
  if (p_up >= 0.5) return {2.0 * p_up - 1.0, BetDirection::Up};
  return {1.0 - 2.0 * p_up, BetDirection::Down};
}

/// Kelly decision for a measurement at `alpha`.
inline RoundDecision make_decision(Prior xi, Angle alpha, Angle delta) {
  const auto bet = kelly_decision(spin_up_prob(xi, alpha, delta));
  return {alpha, bet.fraction, bet.bet_on};
}

/// Multiplicative wealth change of a decided bet for a given outcome.
inline double growth_factor(double fraction, BetDirection bet_on, Outcome outcome) {
  return wins(bet_on, outcome) ? 1.0 + fraction : 1.0 - fraction;
}

inline Wealth apply_bet(Wealth w, const RoundDecision& decision, Outcome outcome) {
  if (!(decision.fraction >= 0.0 && decision.fraction <= 1.0)) throw InvalidArgument("bet fraction must lie in [0, 1]");
  const double next = w.value() * growth_factor(decision.fraction, decision.bet_on, outcome);
  if (!(next > 0.0)) throw BankruptWealth("full-stake bet lost; wealth would reach zero");
  return Wealth(next);
}

/// Expected log2 wealth increment of one Kelly bet: 1 - H2(p).
inline double one_step_growth(double p_up) {
  if (!(p_up >= 0.0 && p_up <= 1.0)) throw InvalidArgument("probability must lie in [0, 1]");
  const double win = std::max(p_up, 1.0 - p_up);
  const double lose = 1.0 - win;
  double g = win * std::log2(2.0 * win);
  if (lose > 0.0) g += lose * std::log2(2.0 * lose);
  return std::clamp(g, 0.0, 1.0);
}

/// Angle maximising the spin-up probability (the last-round growth angle).
///
/// Closed form: tan(alpha) is a root of t^2 + A t - 1 = 0 with
/// A = (xi/(1-xi) + 1 - 2 sin^2 delta) / (sin delta cos delta); of the two
/// roots the one with the larger spin-up probability is returned, ties to the
/// smaller angle. Limits: xi = 1 gives 0, xi = 0 gives delta, delta = 0 gives 0.
/// At delta = pi/2 the closed form is singular and a numerical maximiser is used
/// (xi = 1/2 returns delta/2, where every angle is equally good).
inline Angle myopic_growth_angle(Prior xi_, Angle delta_, const AlphaSearch& search = {}) {
  const double xi = xi_.value();
  const double d = delta_.rad();
  if (d > pi / 2 + 1e-12) throw DegenerateDelta("separation angle must lie in [0, pi/2]");
  if (d < 1e-12) return Angle::radians(0.0);
  if (xi >= 1.0) return Angle::radians(0.0);
  if (xi <= 0.0) return delta_;
  if (std::fabs(d - pi / 2) < 1e-12) {
    if (xi == 0.5) return Angle::radians(d / 2);
    return optimize_alpha([&](Angle a) { return detail::spin_up_prob(xi, a.rad(), d); }, search).angle;
  }

  const double sd = std::sin(d), cd = std::cos(d);
  const double A = (xi / (1.0 - xi) + 1.0 - 2.0 * sd * sd) / (sd * cd);
  const double root = std::hypot(A, 2.0);
  // Product of the roots is -1; pick the cancellation-free form for each sign of A.
  const double t_plus = A >= 0.0 ? 2.0 / (A + root) : 0.5 * (root - A);
  const double t_minus = -1.0 / t_plus;

  const Angle a1 = Angle::radians(std::atan(t_plus));
  const Angle a2 = Angle::radians(std::atan(t_minus));
  const double p1 = detail::spin_up_prob(xi, a1.rad(), d);
  const double p2 = detail::spin_up_prob(xi, a2.rad(), d);
  if (p1 > p2) return a1;
  if (p2 > p1) return a2;
  return a1.rad() <= a2.rad() ? a1 : a2;
}

/// The closed-form information-gain angle
/// atan((xi - 1) sin delta / (xi - (1 - xi) cos delta)), reduced mod pi.
///
/// Transcribed as printed. It is not claimed to maximise anything; compare with
/// info_gain_angle_numeric.
inline Angle info_gain_angle_formula(Prior xi_, Angle delta_) {
  const double xi = xi_.value(), d = delta_.rad();
  const double den = xi - (1.0 - xi) * std::cos(d);
  if (std::fabs(den) < 1e-12) throw UndefinedFormula("information-angle denominator vanishes");
  return Angle::radians(std::atan((xi - 1.0) * std::sin(d) / den));
}

/// Expected drop of the prior's Shannon entropy (bits) from one measurement.
inline double expected_entropy_reduction(Prior xi_, Angle alpha, Angle delta) {
  const double xi = xi_.value();
  const auto b = detail::branch(xi, alpha.rad(), delta.rad());
  double after = 0.0;
  if (b.p_up > 1e-15 && !std::isnan(b.xi_up)) after += b.p_up * detail::binary_entropy(b.xi_up);
  if (b.p_down > 1e-15 && !std::isnan(b.xi_down)) after += b.p_down * detail::binary_entropy(b.xi_down);
  return detail::binary_entropy(xi) - after;
}

/// Angle maximising expected_entropy_reduction, found numerically.
inline Angle info_gain_angle_numeric(Prior xi, Angle delta, const AlphaSearch& search = {}) {
  if (xi.value() < 1e-12 || xi.value() > 1.0 - 1e-12)
    throw DegeneratePrior("no measurement is informative at a certain prior");
  auto gain = [&](Angle a) { return expected_entropy_reduction(xi, a, delta); };
  const auto best = optimize_alpha(gain, search);
  return polish_stationary(gain, best.angle);
}

/// Partial sum of the Bernoulli log-utility value of the St. Petersburg game,
/// sum_{i=1..n} 2^-i ln(2^i); converges to ln 4.
inline double st_petersburg_log_value(int n_terms) {
  if (n_terms < 1) throw InvalidArgument("need at least one term");
  double sum = 0.0;
  for (int i = 1; i <= n_terms; ++i) sum += std::ldexp(1.0, -i) * i * std::numbers::ln2;
  return sum;
}

}  // namespace qkelly
