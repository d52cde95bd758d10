#pragma once

// Reference computations written directly from the game's formulas, kept
// independent of the library code they check.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

inline double p_up(double xi, double alpha, double delta) {
  return xi * std::pow(std::cos(alpha), 2) + (1.0 - xi) * std::pow(std::cos(delta - alpha), 2);
}

inline double xi_up(double xi, double alpha, double delta) {
  return xi * std::pow(std::cos(alpha), 2) / p_up(xi, alpha, delta);
}

inline double xi_down(double xi, double alpha, double delta) {
  const double ref = xi * std::pow(std::sin(alpha), 2);
  return ref / (ref + (1.0 - xi) * std::pow(std::sin(delta - alpha), 2));
}

/// Expected log2 growth of staking fraction f on the outcome with probability p.
inline double log_growth(double p, double f) {
  double g = p * std::log2(1.0 + f);
  if (1.0 - p > 0.0) g += (1.0 - p) * std::log2(1.0 - f);
  return g;
}

inline double entropy2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

struct ScanResult {
  double x;
  double value;
};

/// Dense scan of [lo, hi) with n points, refined by the vertex of the parabola
/// through the best point and its two neighbours.
inline ScanResult scan_max(const std::function<double(double)>& f, double lo, double hi, long n) {
  const double h = (hi - lo) / static_cast<double>(n);
  long best = 0;
  double vbest = f(lo);
  for (long i = 1; i < n; ++i) {
    const double v = f(lo + h * static_cast<double>(i));
    if (v > vbest) {
      vbest = v;
      best = i;
    }
  }
  const double x = lo + h * static_cast<double>(best);
  const double fl = f(x - h), fr = f(x + h);
  const double den = fl - 2.0 * vbest + fr;
  if (den >= 0.0) return {x, vbest};
  // vertex of the parabola through the three best samples
  return {x + 0.5 * h * (fl - fr) / den, vbest - (fl - fr) * (fl - fr) / (8.0 * den)};
}

/// Distance between two axes modulo pi.
inline double axis_gap(double a, double b) {
  double d = std::fmod(std::fabs(a - b), pi);
  return std::min(d, pi - d);
}

}  // namespace oracle
