#pragma once

// Backward induction on the prior alone.
//
// With log utility the wealth separates: U_k(W, xi) = log2 W + G_k(xi), where
// G_k is the best expected log2 gain over the remaining N - k rounds. Each
// step solves
//   G_k(xi) = max_alpha sum_o p_o (log2(1 +/- f) + G_{k+1}(xi_o))
// with f the Kelly fraction of the chosen angle.

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkelly/core.hpp"
#include "qkelly/grid.hpp"
#include "qkelly/optimize.hpp"
#include "qkelly/types.hpp"

namespace qkelly {

/// Branches below this probability are pruned.
inline constexpr double kNegligibleProbability = 1e-15;

/// G_k over the prior grid, with the maximising angle per node.
struct ValueCurve {
  int step = 0;
  std::vector<double> xi_nodes;
  std::vector<double> g_values;
  std::vector<double> alpha_policy;  // radians; empty at the terminal step
};

/// Solved value curves for k = 0..N (curves[k] is step k).
struct ValueStack {
  GameParams params;
  GridSpec grid;
  XiAxis axis;
  std::vector<ValueCurve> curves;

  int n_steps() const { return params.n_steps; }
  const ValueCurve& at(int k) const { return curves.at(static_cast<std::size_t>(k)); }

  /// Interpolated G_k(xi).
  double g(int k, double xi) const { return axis.interpolate(at(k).g_values, xi); }
};

namespace detail {

/// Expected log2 growth of one Kelly round at `alpha` plus the continuation
/// value `cont` evaluated on the posteriors.
template <class Continuation>
double round_value(double xi, double alpha, double delta, Continuation&& cont) {
  const auto b = branch(xi, alpha, delta);
  const auto bet = kelly_decision(b.p_up);
  double v = 0.0;
  if (b.p_up > kNegligibleProbability)
    v += b.p_up * (std::log2(growth_factor(bet.fraction, bet.bet_on, Outcome::Up)) + cont(b.xi_up));
  if (b.p_down > kNegligibleProbability)
    v += b.p_down * (std::log2(growth_factor(bet.fraction, bet.bet_on, Outcome::Down)) + cont(b.xi_down));
  return v;
}

}  // namespace detail

/// Best angle and value at prior `xi` when G_{k+1} is `next`.
inline AlphaOptimum optimal_round(const ValueStack& stack, int k, double xi) {
  const double delta = stack.params.delta.rad();
  const auto& next = stack.at(k + 1).g_values;
  auto objective = [&](Angle a) {
    return detail::round_value(xi, a.rad(), delta, [&](double post) { return stack.axis.interpolate(next, post); });
  };
  return optimize_alpha(objective, stack.grid.alpha_search());
}

/// Like optimal_round, but reads G_{k+1} through the smooth interpolant.
/// Kinks of the piecewise-linear curve bias the argmax angle; this is the
/// decision rule of the optimal policy.
inline AlphaOptimum lookahead_round(const ValueStack& stack, int k, double xi) {
  const double delta = stack.params.delta.rad();
  const auto& next = stack.at(k + 1).g_values;
  auto objective = [&](Angle a) {
    return detail::round_value(xi, a.rad(), delta,
                               [&](double post) { return stack.axis.interpolate_smooth(next, post); });
  };
  return optimize_alpha(objective, stack.grid.alpha_search());
}

/// Exact 1-D backward induction over the prior grid.
inline ValueStack solve_1d(const GameParams& params, const GridSpec& grid) {
  params.validate();
  grid.validate();
  ValueStack stack{params, grid, XiAxis(grid), {}};
  const int N = params.n_steps;
  const int n = stack.axis.size();
  stack.curves.resize(static_cast<std::size_t>(N + 1));
  for (int k = 0; k <= N; ++k) {
    stack.curves[k].step = k;
    stack.curves[k].xi_nodes = stack.axis.nodes();
  }
  stack.curves[N].g_values.assign(static_cast<std::size_t>(n), 0.0);

  for (int k = N - 1; k >= 0; --k) {
    auto& cur = stack.curves[k];
    cur.g_values.resize(static_cast<std::size_t>(n));
    cur.alpha_policy.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const auto best = optimal_round(stack, k, stack.axis[j]);
      cur.g_values[j] = best.value;
      cur.alpha_policy[j] = best.angle.rad();
    }
    const auto& next = stack.curves[k + 1].g_values;
    for (int j = 0; j < n; ++j) {
      if (cur.g_values[j] < next[j] - 1e-6) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "G_%d below G_%d by %.3g at xi=%.6g; refine the prior grid", k, k + 1,
                      next[j] - cur.g_values[j], stack.axis[j]);
        throw GridTooCoarse(msg);
      }
    }
  }
  return stack;
}

/// U_k(w, xi) = log2 w + G_k(xi); exact at grid nodes.
inline double query_value(const ValueStack& stack, int k, Wealth w, Prior xi) {
  if (k < 0 || k > stack.n_steps()) throw InvalidArgument("step index out of range");
  return std::log2(w.value()) + stack.g(k, xi.value());
}

/// Exact recursive maximisation with no value-function interpolation:
/// expected log2(W_N / W_1) from prior params.xi0. Cost grows as
/// (evaluations per angle search)^N, hence the N <= 4 cap.
inline double brute_force_value(const GameParams& params, const AlphaSearch& search) {
  params.validate();
  if (params.n_steps > 4) throw InstanceTooLarge("brute force is limited to N <= 4");
  const double delta = params.delta.rad();
  auto value = [&](auto&& self, int remaining, double xi) -> double {
    if (remaining == 0) return 0.0;
    auto objective = [&](Angle a) {
      return detail::round_value(xi, a.rad(), delta, [&](double post) { return self(self, remaining - 1, post); });
    };
    return optimize_alpha(objective, search).value;
  };
  return value(value, params.n_steps, params.xi0.value());
}

inline double brute_force_value(const GameParams& params, const GridSpec& grid) {
  return brute_force_value(params, grid.alpha_search());
}

}  // namespace qkelly
