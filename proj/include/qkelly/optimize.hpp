#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "qkelly/types.hpp"

namespace qkelly {

/// Settings of the measurement-angle maximiser.
struct AlphaSearch {
  int n_coarse = 181;
  double tol = 1e-10;
  // Refine every competitive coarse peak (needed for the smaller-angle tie
  // break) or only the best bracket (enough when only the value is used).
  bool all_peaks = true;
};

struct AlphaOptimum {
  Angle angle;
  double value = -std::numeric_limits<double>::infinity();
};

namespace detail {

inline constexpr double inv_golden = 0.61803398874989484820;

// Relative tolerance under which two refined maxima count as a tie.
inline bool ties(double a, double b) {
  return std::fabs(a - b) <= 1e-13 * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

/// Golden-section maximisation on [a, b]. Returns the best point evaluated,
/// seeded with `seed`; a refined point replaces the seed only if strictly better.
template <class F>
AlphaOptimum golden_maximise(F&& objective, double a, double b, double tol, AlphaOptimum seed) {
  AlphaOptimum best = seed;
  auto consider = [&](double x, double v) {
    if (v > best.value) best = {Angle::radians(x), v};
  };
  double c = b - inv_golden * (b - a);
  double d = a + inv_golden * (b - a);
  double fc = objective(Angle::radians(c));
  double fd = objective(Angle::radians(d));
  consider(c, fc);
  consider(d, fd);
  while (b - a > tol) {
    // ties keep the left part so that flat objectives drift to smaller angles
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_golden * (b - a);
      fc = objective(Angle::radians(c));
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_golden * (b - a);
      fd = objective(Angle::radians(d));
      consider(d, fd);
    }
  }
  return best;
}

}  // namespace detail

/// Angle of coarse node i for an n-point scan of [0, pi).
inline double coarse_angle(int i, int n) { return pi * static_cast<double>(i) / static_cast<double>(n); }

/// Golden-section refinement of coarse node i (value v) of an n-point scan,
/// bracketed by its two neighbours.
template <class F>
AlphaOptimum refine_bracket(F&& objective, int i, int n, double v, const AlphaSearch& search) {
  const double x = coarse_angle(i, n);
  const double h = pi / n;
  return detail::golden_maximise(objective, x - h, x + h, search.tol, {Angle::radians(x), v});
}

/// Refinement stage of optimize_alpha for callers that evaluate the coarse
/// scan themselves (the 2-D solver batches it). `coarse[i]` must equal
/// objective(coarse_angle(i, coarse.size())).
///
/// The objective is treated as pi-periodic. Every coarse local maximum whose
/// value could still reach the coarse best (judged by its drop to the
/// neighbours) is bracketed by its neighbours and refined; the best refined
/// value wins and ties go to the smaller canonical angle.
template <class F>
AlphaOptimum refine_from_coarse(F&& objective, std::span<const double> coarse, const AlphaSearch& search) {
  const int n = static_cast<int>(coarse.size());
  auto at = [&](int i) { return coarse[(i + n) % n]; };
  // a node level with both neighbours to rounding has nothing to refine
  auto flat = [&](int i) { return detail::ties(at(i), at(i - 1)) && detail::ties(at(i), at(i + 1)); };

  const double vmax = *std::max_element(coarse.begin(), coarse.end());
  int best_i = 0;
  while (!detail::ties(coarse[best_i], vmax)) ++best_i;

  std::vector<AlphaOptimum> found;
  auto refine_at = [&](int i, double v) { found.push_back(refine_bracket(objective, i, n, v, search)); };
  if (!search.all_peaks) {
    if (flat(best_i)) return {Angle::radians(coarse_angle(best_i, n)), coarse[best_i]};
    refine_at(best_i, coarse[best_i]);
    return found.front();
  }
  const double floor = vmax - 1e-14 * std::max(1.0, std::fabs(vmax));
  for (int i = 0; i < n; ++i) {
    const double v = coarse[i];
    const double prev = at(i - 1);
    const double next = at(i + 1);
    if (!(v > prev && v >= next) || flat(i)) continue;
    if (v + std::max(v - prev, v - next) < floor) continue;
    refine_at(i, v);
  }
  if (found.empty()) return {Angle::radians(coarse_angle(best_i, n)), coarse[best_i]};

  AlphaOptimum best = found.front();
  for (const auto& cand : found) {
    if (detail::ties(cand.value, best.value)) {
      if (cand.angle.rad() < best.angle.rad()) best = cand;
    } else if (cand.value > best.value) {
      best = cand;
    }
  }
  return best;
}

/// Maximise a pi-periodic objective of the measurement angle: coarse scan over
/// `search.n_coarse` equally spaced angles in [0, pi), then golden-section
/// refinement to `search.tol`. Deterministic; a constant objective yields 0.
template <class F>
AlphaOptimum optimize_alpha(F&& objective, const AlphaSearch& search) {
  if (search.n_coarse < 8) throw InvalidArgument("coarse angle grid needs at least 8 points");
  if (!(search.tol > 0.0)) throw InvalidArgument("angle tolerance must be positive");
  std::vector<double> coarse(static_cast<std::size_t>(search.n_coarse));
  for (int i = 0; i < search.n_coarse; ++i) coarse[i] = objective(Angle::radians(coarse_angle(i, search.n_coarse)));
  return refine_from_coarse(objective, std::span<const double>(coarse), search);
}

/// Locate a stationary point of a smooth objective near `start` by bisecting
/// the sign of a fourth-order central-difference derivative.
///
/// Golden-section search stalls once objective differences fall below double
/// resolution (about 1e-8 rad for quadratic peaks); the derivative keeps a
/// usable sign much closer to the optimum.
template <class F>
Angle polish_stationary(F&& objective, Angle start, double half_width = 1e-6, double step = 1e-3) {
  auto diff = [&](double x, double s) { return objective(Angle::radians(x + s)) - objective(Angle::radians(x - s)); };
  auto slope = [&](double x) { return 8.0 * diff(x, step) - diff(x, 2.0 * step); };
  double a = start.rad() - half_width;
  double b = start.rad() + half_width;
  double sa = slope(a);
  double sb = slope(b);
  // a maximum has rising slope on the left and falling slope on the right
  if (!(sa > 0.0 && sb < 0.0)) return start;
  for (int it = 0; it < 60 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    const double sm = slope(m);
    if (sm > 0.0) {
      a = m;
    } else if (sm < 0.0) {
      b = m;
    } else {
      a = b = m;
    }
  }
  return Angle::radians(0.5 * (a + b));
}

}  // namespace qkelly
