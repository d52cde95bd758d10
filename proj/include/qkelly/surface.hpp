#pragma once

// Two-dimensional (wealth, prior) backward induction, laid out the way the
// reference pseudo-code runs it: for every step, every wealth node and every
// prior node, optimise the angle against an interpolation of the next layer.
//
// Interpolation is linear in W and in xi between nodes. Outside the wealth
// axis the next layer is continued with slope 1 in log2 W from the edge node
// (the asymptotic behaviour of log utility).

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <algorithm>
#include <vector>

#include "qkelly/core.hpp"
#include "qkelly/grid.hpp"
#include "qkelly/optimize.hpp"
#include "qkelly/solver.hpp"
#include "qkelly/types.hpp"

namespace qkelly {

/// U[k][i][j] over the wealth axis (i) and the prior axis (j).
struct UtilitySurface {
  GameParams params;
  GridSpec grid;
  WealthAxis w_axis;
  XiAxis xi_axis;
  // layers[k] is stored prior-major: value (i, j) lives at j * n_w + i
  std::vector<std::vector<double>> layers;

  int n_steps() const { return params.n_steps; }
  double at(int k, int i, int j) const { return layers.at(static_cast<std::size_t>(k))[index(i, j)]; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(w_axis.size()) + static_cast<std::size_t>(i);
  }
};

namespace detail {

struct SurfaceBranch {
  double p = 0.0;
  int xi_lo = 0;
  double xi_weight = 0.0;
  double w_shift = 0.0;  // continuous wealth-index offset, log2(1 +/- f) * nodes per octave
  int w_off = 0;         // floor(w_shift)
  double w_weight = 0.0;  // linear-in-W weight inside the bracket
};

/// Everything about one candidate angle at one prior node that does not depend on W.
struct SurfaceProbe {
  int count = 0;
  SurfaceBranch b[2];
};

inline SurfaceProbe make_surface_probe(double xi, double alpha, double delta, const XiAxis& xa, const WealthAxis& wa) {
  const auto br = branch(xi, alpha, delta);
  const auto bet = kelly_decision(br.p_up);
  SurfaceProbe probe;
  auto add = [&](double p, double post, Outcome o) {
    if (p <= kNegligibleProbability) return;
    auto& b = probe.b[probe.count++];
    b.p = p;
    const auto xb = xa.locate(post);
    b.xi_lo = xb.lo;
    b.xi_weight = xb.weight;
    b.w_shift = std::log2(growth_factor(bet.fraction, bet.bet_on, o)) * wa.per_octave();
    b.w_off = static_cast<int>(std::floor(b.w_shift));
    b.w_weight = wa.weight_for_fraction(b.w_shift - b.w_off);
  };
  add(br.p_up, br.xi_up, Outcome::Up);
  add(br.p_down, br.xi_down, Outcome::Down);
  return probe;
}

// Value of the next layer at wealth row index i + shift and a bracketed prior.
inline double surface_lookup(std::span<const double> next, int n_w, double per_octave, int i, const SurfaceBranch& b) {
  auto row = [&](int w) {
    const double lo = next[static_cast<std::size_t>(b.xi_lo) * n_w + w];
    const double hi = next[static_cast<std::size_t>(b.xi_lo + 1) * n_w + w];
    return lo + b.xi_weight * (hi - lo);
  };
  const int lo = i + b.w_off;
  if (lo < 0) return row(0) + (i + b.w_shift) / per_octave;
  if (lo >= n_w - 1) return row(n_w - 1) + (i + b.w_shift - (n_w - 1)) / per_octave;
  const double a = row(lo);
  return a + b.w_weight * (row(lo + 1) - a);
}

inline double eval_surface_probe(const SurfaceProbe& probe, std::span<const double> next, int n_w, double per_octave,
                                 int i) {
  double v = 0.0;
  for (int c = 0; c < probe.count; ++c) v += probe.b[c].p * surface_lookup(next, n_w, per_octave, i, probe.b[c]);
  return v;
}

/// Adds p * lookup for one branch to out[i] for every wealth row i.
inline void accumulate_branch_rows(const SurfaceBranch& b, std::span<const double> next, int n_w, double per_octave,
                                   double* out) {
  const double* lo_row = next.data() + static_cast<std::size_t>(b.xi_lo) * n_w;
  const double* hi_row = lo_row + n_w;
  const int first = std::clamp(-b.w_off, 0, n_w);
  const int last = std::clamp(n_w - 1 - b.w_off, first, n_w);
  for (int i = 0; i < first; ++i) out[i] += b.p * surface_lookup(next, n_w, per_octave, i, b);
  const double xw = b.xi_weight, ww = b.w_weight, p = b.p;
  const double* lo_w = lo_row + b.w_off;
  const double* hi_w = hi_row + b.w_off;
  for (int i = first; i < last; ++i) {
    const double r0 = lo_w[i] + xw * (hi_w[i] - lo_w[i]);
    const double r1 = lo_w[i + 1] + xw * (hi_w[i + 1] - lo_w[i + 1]);
    out[i] += p * (r0 + ww * (r1 - r0));
  }
  for (int i = last; i < n_w; ++i) out[i] += b.p * surface_lookup(next, n_w, per_octave, i, b);
}

/// eval_surface_probe for every wealth row at once. Accumulates in the same
/// order as the scalar path, so results match it bit for bit.
inline void eval_surface_probe_rows(const SurfaceProbe& probe, std::span<const double> next, int n_w,
                                    double per_octave, double* out) {
  std::fill(out, out + n_w, 0.0);
  for (int c = 0; c < probe.count; ++c) accumulate_branch_rows(probe.b[c], next, n_w, per_octave, out);
}

/// Open-addressing map from an angle's bit pattern to its probe, cleared in O(1).
class ProbeCache {
public:
  ProbeCache() { rehash(1024); }

  void clear() {
    if (++generation_ == 0) {
      std::fill(gen_.begin(), gen_.end(), 0u);
      generation_ = 1;
    }
    probes_.clear();
  }

  template <class Make>
  const SurfaceProbe& get(double alpha, Make&& make) {
    const auto key = std::bit_cast<std::uint64_t>(alpha);
    std::size_t slot = mix(key) & mask_;
    while (gen_[slot] == generation_) {
      if (keys_[slot] == key) return probes_[index_[slot]];
      slot = (slot + 1) & mask_;
    }
    if (4 * (probes_.size() + 1) > 3 * keys_.size()) {
      grow();
      return get(alpha, make);
    }
    gen_[slot] = generation_;
    keys_[slot] = key;
    index_[slot] = static_cast<std::uint32_t>(probes_.size());
    probes_.push_back(make(alpha));
    return probes_.back();
  }

private:
  static std::size_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
  }

  void rehash(std::size_t capacity) {
    keys_.assign(capacity, 0);
    index_.assign(capacity, 0);
    gen_.assign(capacity, 0u);
    mask_ = capacity - 1;
    generation_ = 1;
  }

  void grow() {
    const auto old_keys = keys_;
    const auto old_index = index_;
    const auto old_gen = gen_;
    const auto live = generation_;
    rehash(keys_.size() * 2);
    for (std::size_t s = 0; s < old_keys.size(); ++s) {
      if (old_gen[s] != live) continue;
      std::size_t slot = mix(old_keys[s]) & mask_;
      while (gen_[slot] == generation_) slot = (slot + 1) & mask_;
      gen_[slot] = generation_;
      keys_[slot] = old_keys[s];
      index_[slot] = old_index[s];
    }
  }

  std::vector<std::uint64_t> keys_;
  std::vector<std::uint32_t> index_;
  std::vector<std::uint32_t> gen_;
  std::vector<SurfaceProbe> probes_;
  std::size_t mask_ = 0;
  std::uint32_t generation_ = 1;
};

}  // namespace detail

/// Backward induction over the full (W, xi) grid.
///
/// The terminal layer is log2 W. Final wealth is held at w_max and the surface
/// is read backwards, so contours through U = log2 w_max describe the wealth
/// needed at step k to reach w_max.
inline UtilitySurface solve_2d_paper(const GameParams& params, const GridSpec& grid) {
  params.validate();
  grid.validate();
  UtilitySurface s{params, grid, WealthAxis(grid), XiAxis(grid), {}};
  const int N = params.n_steps;
  const int n_w = s.w_axis.size();
  const int n_xi = s.xi_axis.size();
  const int n_a = grid.n_alpha_coarse;
  const double per_octave = s.w_axis.per_octave();
  const double delta = params.delta.rad();
  // Only values are stored and the objective is invariant under
  // alpha -> alpha + pi/2 (outcome labels swap), so the coarse scan covers
  // [0, pi/2] and the best bracket per node is refined.
  const auto search = grid.alpha_search();
  const int n_scan = std::min(n_a, (n_a + 1) / 2 + 1);

  s.layers.assign(static_cast<std::size_t>(N + 1), {});
  auto& terminal = s.layers[N];
  terminal.resize(static_cast<std::size_t>(n_w) * n_xi);
  for (int j = 0; j < n_xi; ++j)
    for (int i = 0; i < n_w; ++i) terminal[s.index(i, j)] = std::log2(s.w_axis[i]);

  std::vector<double> scan(static_cast<std::size_t>(n_w));
  std::vector<double> best_value(static_cast<std::size_t>(n_w));
  std::vector<int> best_index(static_cast<std::size_t>(n_w));
  detail::ProbeCache refined;

  for (int k = N - 1; k >= 0; --k) {
    const std::span<const double> next(s.layers[k + 1]);
    auto& cur = s.layers[k];
    cur.resize(static_cast<std::size_t>(n_w) * n_xi);
    for (int j = 0; j < n_xi; ++j) {
      const double xi = s.xi_axis[j];
      auto make = [&](double alpha) { return detail::make_surface_probe(xi, alpha, delta, s.xi_axis, s.w_axis); };

      // coarse scan for all wealth rows at once, keeping the first argmax per row
      std::fill(best_value.begin(), best_value.end(), -std::numeric_limits<double>::infinity());
      std::fill(best_index.begin(), best_index.end(), 0);
      for (int a = 0; a < n_scan; ++a) {
        detail::eval_surface_probe_rows(make(coarse_angle(a, n_a)), next, n_w, per_octave, scan.data());
        for (int i = 0; i < n_w; ++i) {
          if (scan[i] > best_value[i]) {
            best_value[i] = scan[i];
            best_index[i] = a;
          }
        }
      }

      refined.clear();
      for (int i = 0; i < n_w; ++i) {
        auto objective = [&](Angle alpha) {
          return detail::eval_surface_probe(refined.get(alpha.rad(), make), next, n_w, per_octave, i);
        };
        cur[s.index(i, j)] = refine_bracket(objective, best_index[i], n_a, best_value[i], search).value;
      }
    }
    for (int j = 0; j < n_xi; ++j) {
      for (int i = 0; i < n_w; ++i) {
        const double drop = next[s.index(i, j)] - cur[s.index(i, j)];
        if (drop > 1e-6) {
          char msg[160];
          std::snprintf(msg, sizeof msg, "U_%d below U_%d by %.3g at (W=%.6g, xi=%.6g); refine the grid", k, k + 1, drop,
                        s.w_axis[i], s.xi_axis[j]);
          throw GridTooCoarse(msg);
        }
      }
    }
  }
  return s;
}

/// Interpolated U_k(w, xi) on the surface; linear in W and xi, exact at nodes.
inline double query_value(const UtilitySurface& s, int k, Wealth w, Prior xi) {
  if (k < 0 || k > s.n_steps()) throw InvalidArgument("step index out of range");
  if (!s.w_axis.contains(w.value())) throw OutOfRangeWealth("wealth outside the surface's W axis");
  const int n_w = s.w_axis.size();
  const double t = std::clamp(s.w_axis.index_of(w.value()), 0.0, static_cast<double>(n_w - 1));
  int lo = std::min(static_cast<int>(std::floor(t)), n_w - 2);
  // snap onto nodes that log2 round-off pushed a hair off
  if (std::fabs(t - std::round(t)) < 1e-9) lo = std::min(static_cast<int>(std::round(t)), n_w - 2);
  const double ww = std::clamp((w.value() - s.w_axis[lo]) / (s.w_axis[lo + 1] - s.w_axis[lo]), 0.0, 1.0);
  const auto xb = s.xi_axis.locate(xi.value());
  auto cell = [&](int i) {
    const double a = s.at(k, i, xb.lo);
    return a + xb.weight * (s.at(k, i, xb.lo + 1) - a);
  };
  const double a = cell(lo);
  return a + ww * (cell(lo + 1) - a);
}

/// Largest |U[k][i][j] - log2 W_i - G_k(xi_j)| between a surface and a 1-D
/// stack solved on the same prior grid.
inline double separability_residual(const UtilitySurface& s, const ValueStack& stack) {
  if (s.xi_axis.nodes() != stack.axis.nodes() || s.n_steps() != stack.n_steps())
    throw InvalidArgument("surface and value stack use different grids");
  double worst = 0.0;
  for (int k = 0; k <= s.n_steps(); ++k) {
    const auto& g = stack.at(k).g_values;
    for (int j = 0; j < s.xi_axis.size(); ++j)
      for (int i = 0; i < s.w_axis.size(); ++i)
        worst = std::max(worst, std::fabs(s.at(k, i, j) - std::log2(s.w_axis[i]) - g[j]));
  }
  return worst;
}

}  // namespace qkelly
