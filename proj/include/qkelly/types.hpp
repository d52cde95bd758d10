#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "qkelly/errors.hpp"

namespace qkelly {

inline constexpr double pi = std::numbers::pi;

/// Measurement axis angle in radians, canonicalised to [0, pi).
///
/// A projective spin measurement along a and along a + pi is the same axis
/// with the outcome labels swapped. Labels are tracked explicitly through
/// BetDirection, so the angle itself is reduced mod pi.
class Angle {
public:
  constexpr Angle() = default;

  static Angle radians(double rad) { return Angle(canonicalise(rad)); }
  static Angle degrees(double deg) { return radians(deg * pi / 180.0); }

  double rad() const { return rad_; }
  double deg() const { return rad_ * 180.0 / pi; }

  static double canonicalise(double rad) {
    if (rad >= 0.0 && rad < pi) return rad;
    if (rad < 0.0 && rad >= -pi) {
      const double r = rad + pi;
      return r < pi ? r : 0.0;
    }
    if (!std::isfinite(rad)) throw InvalidArgument("angle must be finite");
    double r = std::fmod(rad, pi);
    if (r < 0.0) r += pi;
    // fmod of a value a hair below a multiple of pi can land on pi after the shift
    if (r >= pi) r = 0.0;
    return r;
  }

  friend bool operator==(const Angle&, const Angle&) = default;

private:
  explicit Angle(double canonical) : rad_(canonical) {}
  double rad_ = 0.0;
};

/// Shortest distance between two measurement axes, in [0, pi/2].
inline double axis_distance(Angle a, Angle b) {
  double d = std::fabs(a.rad() - b.rad());
  return std::min(d, pi - d);
}

/// Probability weight on the reference state (the one at angle 0).
class Prior {
public:
  constexpr Prior() = default;
  explicit Prior(double xi) : xi_(xi) {
    if (!(xi >= 0.0 && xi <= 1.0)) throw InvalidArgument("prior must lie in [0, 1]");
  }
  double value() const { return xi_; }
  friend bool operator==(const Prior&, const Prior&) = default;

private:
  double xi_ = 0.5;
};

class Wealth {
public:
  constexpr Wealth() = default;
  explicit Wealth(double w) : w_(w) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("wealth must be finite and positive");
  }
  double value() const { return w_; }
  friend bool operator==(const Wealth&, const Wealth&) = default;

private:
  double w_ = 1.0;
};

enum class Outcome { Up, Down };
enum class BetDirection { Up, Down };

inline constexpr std::string_view to_string(Outcome o) { return o == Outcome::Up ? "up" : "down"; }
inline constexpr std::string_view to_string(BetDirection b) { return b == BetDirection::Up ? "up" : "down"; }

inline constexpr bool wins(BetDirection bet, Outcome outcome) {
  return (bet == BetDirection::Up) == (outcome == Outcome::Up);
}

/// Problem instance: separation angle, number of rounds, initial prior.
struct GameParams {
  Angle delta;
  int n_steps = 1;
  Prior xi0;

  GameParams() = default;
  GameParams(Angle delta_, int n_steps_, Prior xi0_) : delta(delta_), n_steps(n_steps_), xi0(xi0_) { validate(); }

  static GameParams from_degrees(double delta_deg, int n_steps, double xi0) {
    if (!(delta_deg >= 0.0 && delta_deg <= 90.0)) throw InvalidArgument("delta must lie in [0, 90] degrees");
    return GameParams(Angle::degrees(delta_deg), n_steps, Prior(xi0));
  }

  void validate() const {
    if (delta.rad() > pi / 2 + 1e-12) throw InvalidArgument("delta must lie in [0, pi/2]");
    if (n_steps < 1) throw InvalidArgument("n_steps must be at least 1");
  }

  bool degenerate() const { return delta.rad() < 1e-12; }
};

/// Fraction and direction of a Kelly bet.
struct KellyBet {
  double fraction = 0.0;
  BetDirection bet_on = BetDirection::Up;
};

/// One round's action.
struct RoundDecision {
  Angle alpha;
  double fraction = 0.0;
  BetDirection bet_on = BetDirection::Up;

  friend bool operator==(const RoundDecision&, const RoundDecision&) = default;
};

}  // namespace qkelly
