#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qkelly/errors.hpp"
#include "qkelly/optimize.hpp"

namespace qkelly {

enum class XiSpacing { LogMirrored, Uniform };

inline std::string to_string(XiSpacing s) { return s == XiSpacing::LogMirrored ? "log-mirrored" : "uniform"; }

/// Discretisation of the solver state space and of the angle search.
struct GridSpec {
  int n_xi = 2001;  // odd, so that 1/2 is a node
  XiSpacing xi_spacing = XiSpacing::LogMirrored;
  double xi_log_stretch = 8.0;  // ratio of node spacing at 1/2 to spacing at 0 is about e^stretch
  int n_w = 513;
  double w_max = 2.0;
  double w_octaves = 16.0;  // W axis spans [w_max 2^-w_octaves, w_max]
  int n_alpha_coarse = 181;
  double alpha_tol = 1e-10;

  AlphaSearch alpha_search() const { return {n_alpha_coarse, alpha_tol}; }

  void validate() const {
    if (n_xi < 3 || n_xi % 2 == 0) throw InvalidArgument("n_xi must be an odd integer >= 3");
    if (!(xi_log_stretch > 0.0)) throw InvalidArgument("xi_log_stretch must be positive");
    if (n_w < 3) throw InvalidArgument("n_w must be >= 3");
    if (!(w_max > 0.0)) throw InvalidArgument("w_max must be positive");
    if (!(w_octaves > 0.0)) throw InvalidArgument("w_octaves must be positive");
    if (n_alpha_coarse < 8) throw InvalidArgument("n_alpha_coarse must be >= 8");
    if (!(alpha_tol > 0.0)) throw InvalidArgument("alpha_tol must be positive");
  }
};

/// Bracketing node and linear weight of a point on an axis.
struct Bracket {
  int lo = 0;
  double weight = 0.0;  // 0 at nodes[lo], 1 at nodes[lo + 1]
};

/// Prior axis on [0, 1] with exact nodes at 0, 1/2 and 1.
///
/// Log-mirrored spacing makes xi + c geometric on [0, 1/2], with
/// c = 0.5 / (e^s - 1), and mirrors that half onto [1/2, 1].
class XiAxis {
public:
  XiAxis(int n, XiSpacing spacing, double stretch = 8.0) : spacing_(spacing), stretch_(stretch) {
    if (n < 3 || n % 2 == 0) throw InvalidArgument("prior axis needs an odd node count >= 3");
    half_ = (n - 1) / 2;
    offset_ = 0.5 / std::expm1(stretch_);
    nodes_.resize(static_cast<std::size_t>(n));
    for (int u = 0; u <= half_; ++u) nodes_[u] = lower_node(u);
    nodes_[0] = 0.0;
    nodes_[half_] = 0.5;
    for (int u = 0; u < half_; ++u) nodes_[n - 1 - u] = 1.0 - nodes_[u];
  }

  explicit XiAxis(const GridSpec& g) : XiAxis(g.n_xi, g.xi_spacing, g.xi_log_stretch) {}

  const std::vector<double>& nodes() const { return nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double operator[](int i) const { return nodes_[i]; }
  int mirror(int i) const { return size() - 1 - i; }

  Bracket locate(double xi) const {
    const int n = size();
    xi = std::clamp(xi, 0.0, 1.0);
    int lo;
    if (xi <= 0.5) {
      lo = static_cast<int>(std::floor(lower_index(xi)));
    } else {
      lo = n - 2 - static_cast<int>(std::floor(lower_index(1.0 - xi)));
    }
    lo = std::clamp(lo, 0, n - 2);
    while (lo > 0 && nodes_[lo] > xi) --lo;
    while (lo < n - 2 && nodes_[lo + 1] < xi) ++lo;
    const double span = nodes_[lo + 1] - nodes_[lo];
    return {lo, std::clamp((xi - nodes_[lo]) / span, 0.0, 1.0)};
  }

  /// Piecewise-linear interpolation of node values.
  double interpolate(std::span<const double> values, double xi) const {
    const auto b = locate(xi);
    return values[b.lo] + b.weight * (values[b.lo + 1] - values[b.lo]);
  }

  /// Piecewise-cubic Hermite interpolation with three-point (parabolic)
  /// node slopes: C1, third-order accurate on smooth data, exact at nodes.
  /// Unlike interpolate() it may overshoot next to kinks.
  double interpolate_smooth(std::span<const double> values, double xi) const {
    const auto b = locate(xi);
    const int i = b.lo;
    const double h = nodes_[i + 1] - nodes_[i];
    const double t = b.weight;
    const double m0 = slope(values, i), m1 = slope(values, i + 1);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * values[i] + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * values[i + 1] +
           (t3 - t2) * h * m1;
  }

private:
  double secant(std::span<const double> v, int i) const { return (v[i + 1] - v[i]) / (nodes_[i + 1] - nodes_[i]); }

  // derivative at node i of the parabola through i and its two nearest neighbours
  double slope(std::span<const double> v, int i) const {
    const int n = size();
    if (i == 0 || i == n - 1) {
      const int a = i == 0 ? 0 : n - 2, b = i == 0 ? 1 : n - 3;
      const double h0 = nodes_[a + 1] - nodes_[a], h1 = nodes_[b + 1] - nodes_[b];
      const double d0 = secant(v, a), d1 = secant(v, b);
      return ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    }
    const double h0 = nodes_[i] - nodes_[i - 1], h1 = nodes_[i + 1] - nodes_[i];
    return (h1 * secant(v, i - 1) + h0 * secant(v, i)) / (h0 + h1);
  }

  double lower_node(int u) const {
    const double t = static_cast<double>(u) / half_;
    if (spacing_ == XiSpacing::Uniform) return 0.5 * t;
    return offset_ * std::expm1(stretch_ * t);
  }

  // Continuous node index of xi in [0, 1/2].
  double lower_index(double xi) const {
    if (spacing_ == XiSpacing::Uniform) return 2.0 * xi * half_;
    return std::log1p(xi / offset_) / stretch_ * half_;
  }

  XiSpacing spacing_;
  double stretch_;
  int half_ = 0;
  double offset_ = 0.0;
  std::vector<double> nodes_;
};

/// Log-spaced wealth axis w_max * 2^((i - (n-1)) / nodes_per_octave).
class WealthAxis {
public:
  WealthAxis(int n, double w_max, double octaves) : n_(n), w_max_(w_max), per_octave_((n - 1) / octaves) {
    if (n < 3) throw InvalidArgument("wealth axis needs >= 3 nodes");
    nodes_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) nodes_[i] = w_max * std::exp2((i - (n - 1)) / per_octave_);
    nodes_[n - 1] = w_max;
  }

  explicit WealthAxis(const GridSpec& g) : WealthAxis(g.n_w, g.w_max, g.w_octaves) {}

  const std::vector<double>& nodes() const { return nodes_; }
  int size() const { return n_; }
  double operator[](int i) const { return nodes_[i]; }
  double per_octave() const { return per_octave_; }
  double w_min() const { return nodes_.front(); }
  double w_max() const { return w_max_; }

  /// Continuous index of a wealth value (may fall outside [0, n-1]).
  double index_of(double w) const { return (n_ - 1) + std::log2(w / w_max_) * per_octave_; }

  /// Linear-in-W weight for a point sitting `frac` index units above a node.
  /// Independent of the node because the axis is geometric.
  double weight_for_fraction(double frac) const { return std::expm1(frac / per_octave_ * std::numbers::ln2) / step_ratio_m1(); }

  bool contains(double w) const {
    return w >= nodes_.front() * (1.0 - 1e-12) && w <= nodes_.back() * (1.0 + 1e-12);
  }

private:
  double step_ratio_m1() const { return std::expm1(std::numbers::ln2 / per_octave_); }

  int n_;
  double w_max_;
  double per_octave_;
  std::vector<double> nodes_;
};

}  // namespace qkelly
