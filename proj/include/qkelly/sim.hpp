#pragma once

// Seeded Monte Carlo play of whole games.
//
// Random stream: run i of a batch uses std::mt19937_64 seeded with
// base_seed + i. Uniforms are the top 53 bits of each draw scaled by 2^-53,
// so streams are identical on every platform. The first uniform of a run
// picks the hidden state, then one uniform per round picks the outcome.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qkelly/core.hpp"
#include "qkelly/policy.hpp"
#include "qkelly/types.hpp"

namespace qkelly {

/// Hidden preparation shared by every particle of a run.
enum class TrueState { Reference, Alternative };

inline constexpr std::string_view to_string(TrueState s) {
  return s == TrueState::Reference ? "reference" : "alternative";
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

private:
  std::mt19937_64 gen_;
};

struct TrajectoryRound {
  RoundDecision decision;  // decision.alpha is the measurement angle
  Outcome outcome = Outcome::Up;
  Prior posterior;
  Wealth wealth;
};

struct Trajectory {
  std::uint64_t run_seed = 0;
  TrueState true_state = TrueState::Reference;
  std::vector<TrajectoryRound> rounds;
  std::string outcome_string;  // '+' for up, '-' for down

  /// log2 of final over initial wealth (initial wealth is 1).
  double log2_growth() const { return rounds.empty() ? 0.0 : std::log2(rounds.back().wealth.value()); }
  double final_posterior(const GameParams& params) const {
    return rounds.empty() ? params.xi0.value() : rounds.back().posterior.value();
  }
};

/// Probability of spin-up given the true state.
inline double true_up_probability(TrueState s, Angle alpha, Angle delta) {
  const double c = s == TrueState::Reference ? std::cos(alpha.rad()) : std::cos(delta.rad() - alpha.rad());
  return c * c;
}

/// One game played with decisions from `decide_at` (see DecisionCache).
inline Trajectory simulate_run(const GameParams& params, DecisionCache& decide_at, std::uint64_t seed,
                               std::optional<TrueState> forced_state = std::nullopt) {
  const double xi0 = params.xi0.value();
  Rng rng(seed);
  const double u0 = rng.uniform();
  Trajectory t;
  t.run_seed = seed;
  t.true_state = u0 < xi0 ? TrueState::Reference : TrueState::Alternative;
  if (forced_state) {
    if ((*forced_state == TrueState::Reference && xi0 == 0.0) || (*forced_state == TrueState::Alternative && xi0 == 1.0))
      throw InvalidArgument("forced state has zero prior probability");
    t.true_state = *forced_state;
  }
  t.rounds.reserve(static_cast<std::size_t>(params.n_steps));
  Prior xi = params.xi0;
  Wealth w(1.0);
  for (int k = 0; k < params.n_steps; ++k) {
    const auto d = decide_at(k, xi);
    const Outcome o =
        rng.uniform() < true_up_probability(t.true_state, d.alpha, params.delta) ? Outcome::Up : Outcome::Down;
    xi = posterior(xi, d.alpha, params.delta, o);
    w = apply_bet(w, d, o);
    t.rounds.push_back({d, o, xi, w});
    t.outcome_string += o == Outcome::Up ? '+' : '-';
  }
  return t;
}

inline Trajectory simulate_run(const GameParams& params, const PolicySpec& policy, std::uint64_t seed,
                               std::optional<TrueState> forced_state = std::nullopt) {
  params.validate();
  DecisionCache decide_at(policy, params);
  return simulate_run(params, decide_at, seed, forced_state);
}

/// Per-run line of a batch.
struct RunSummary {
  std::uint64_t seed = 0;
  TrueState true_state = TrueState::Reference;
  double log2_growth = 0.0;
  double final_xi = 0.0;
  double xi_error = 0.0;  // |final posterior - [true state is the reference]|
  std::string outcomes;
};

struct BatchStats {
  int n_runs = 0;
  double mean_log2_growth = 0.0;
  double std_log2_growth = 0.0;  // sample standard deviation
  double stderr_log2_growth = 0.0;
  double mean_final_xi_error = 0.0;
  std::vector<RunSummary> runs;
  std::vector<Trajectory> trajectories;  // the first few runs in full
};

/// n_runs games with seeds base_seed .. base_seed + n_runs - 1. Aggregation
/// runs in seed order, so results are reproducible bit for bit.
inline BatchStats simulate_batch(const GameParams& params, const PolicySpec& policy, int n_runs,
                                 std::uint64_t base_seed, int keep_trajectories = 0) {
  params.validate();
  if (n_runs < 1) throw InvalidArgument("n_runs must be at least 1");
  DecisionCache decide_at(policy, params);
  BatchStats s;
  s.n_runs = n_runs;
  s.runs.reserve(static_cast<std::size_t>(n_runs));
  for (int i = 0; i < n_runs; ++i) {
    auto t = simulate_run(params, decide_at, base_seed + static_cast<std::uint64_t>(i));
    RunSummary r;
    r.seed = t.run_seed;
    r.true_state = t.true_state;
    r.log2_growth = t.log2_growth();
    r.final_xi = t.final_posterior(params);
    r.xi_error = std::fabs(r.final_xi - (t.true_state == TrueState::Reference ? 1.0 : 0.0));
    r.outcomes = t.outcome_string;
    s.runs.push_back(std::move(r));
    if (i < keep_trajectories) s.trajectories.push_back(std::move(t));
  }
  double sum = 0.0, err = 0.0;
  for (const auto& r : s.runs) {
    sum += r.log2_growth;
    err += r.xi_error;
  }
  s.mean_log2_growth = sum / n_runs;
  s.mean_final_xi_error = err / n_runs;
  double ss = 0.0;
  for (const auto& r : s.runs) ss += (r.log2_growth - s.mean_log2_growth) * (r.log2_growth - s.mean_log2_growth);
  s.std_log2_growth = n_runs > 1 ? std::sqrt(ss / (n_runs - 1)) : 0.0;
  s.stderr_log2_growth = s.std_log2_growth / std::sqrt(static_cast<double>(n_runs));
  return s;
}

struct ComparisonRow {
  std::string policy;
  std::optional<double> exact_value;  // present when N <= 12
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  int n_runs = 0;
};

/// Every policy plays the same seed sequence (common random numbers).
inline std::vector<ComparisonRow> compare_strategies(const GameParams& params, const std::vector<PolicySpec>& policies,
                                                     int n_runs, std::uint64_t base_seed) {
  if (policies.size() < 2) throw InvalidArgument("comparison needs at least two policies");
  std::vector<ComparisonRow> rows;
  for (const auto& p : policies) {
    const auto stats = simulate_batch(params, p, n_runs, base_seed);
    ComparisonRow row{policy_name(p), std::nullopt, stats.mean_log2_growth, stats.stderr_log2_growth, n_runs};
    if (params.n_steps <= 12) row.exact_value = evaluate_policy_exact(params, p);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qkelly
