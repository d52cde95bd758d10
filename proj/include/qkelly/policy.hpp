#pragma once

// Betting strategies and their exact evaluation by outcome enumeration.

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>

#include "qkelly/core.hpp"
#include "qkelly/solver.hpp"
#include "qkelly/types.hpp"

namespace qkelly {

/// Lookahead on a solved value stack: each round maximises the round value
/// against a smooth interpolation of G_{k+1}.
struct OptimalPolicy {
  std::shared_ptr<const ValueStack> stack;
};

/// Maximise this round's growth only.
struct MyopicPolicy {};

/// Maximise the expected entropy drop of the prior.
struct MaxInfoPolicy {};

/// Measure at a fixed angle every round, betting Kelly.
struct FixedAnglePolicy {
  Angle alpha;
};

/// Measure at angle 0 and never bet.
struct ZeroBetPolicy {};

using PolicySpec = std::variant<OptimalPolicy, MyopicPolicy, MaxInfoPolicy, FixedAnglePolicy, ZeroBetPolicy>;

inline std::string policy_name(const PolicySpec& p) {
  struct {
    std::string operator()(const OptimalPolicy&) const { return "optimal"; }
    std::string operator()(const MyopicPolicy&) const { return "myopic"; }
    std::string operator()(const MaxInfoPolicy&) const { return "maxinfo"; }
    std::string operator()(const FixedAnglePolicy& f) const {
      char buf[48];
      std::snprintf(buf, sizeof buf, "fixed:%.12g", f.alpha.deg());
      return buf;
    }
    std::string operator()(const ZeroBetPolicy&) const { return "zerobet"; }
  } visitor;
  return std::visit(visitor, p);
}

/// Throws UnsolvablePolicy if `p` cannot act on `params` (an optimal policy
/// without a stack, or with one solved for another game).
inline void check_policy(const PolicySpec& p, const GameParams& params) {
  const auto* opt = std::get_if<OptimalPolicy>(&p);
  if (!opt) return;
  if (!opt->stack) throw UnsolvablePolicy("optimal policy needs a solved value stack");
  const auto& sp = opt->stack->params;
  if (sp.n_steps != params.n_steps || std::fabs(sp.delta.rad() - params.delta.rad()) > 1e-15)
    throw UnsolvablePolicy("value stack was solved for a different game");
}

/// Action of `p` in round k (0-based) at the current posterior.
inline RoundDecision decide(const PolicySpec& p, const GameParams& params, int k, Prior xi) {
  const Angle delta = params.delta;
  if (std::holds_alternative<ZeroBetPolicy>(p)) return {Angle::radians(0.0), 0.0, BetDirection::Up};
  if (const auto* f = std::get_if<FixedAnglePolicy>(&p)) return make_decision(xi, f->alpha, delta);
  if (const auto* o = std::get_if<OptimalPolicy>(&p)) {
    check_policy(p, params);
    return make_decision(xi, lookahead_round(*o->stack, k, xi.value()).angle, delta);
  }
  // nothing left to learn at a certain prior, so max-info takes the sure bet
  const bool certain = xi.value() < 1e-12 || xi.value() > 1.0 - 1e-12;
  if (std::holds_alternative<MaxInfoPolicy>(p) && !certain)
    return make_decision(xi, info_gain_angle_numeric(xi, delta), delta);
  return make_decision(xi, myopic_growth_angle(xi, delta), delta);
}

/// Memoises decide() on (round, exact posterior). Posteriors reached by a
/// policy repeat heavily across simulated runs.
class DecisionCache {
public:
  DecisionCache(const PolicySpec& policy, const GameParams& params, std::size_t max_entries = std::size_t{1} << 20)
      : policy_(policy), params_(params), max_entries_(max_entries) {
    check_policy(policy_, params_);
  }

  RoundDecision operator()(int k, Prior xi) {
    const Key key{k, std::bit_cast<std::uint64_t>(xi.value())};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const auto d = decide(policy_, params_, k, xi);
    if (cache_.size() < max_entries_) cache_.emplace(key, d);
    return d;
  }

private:
  struct Key {
    int k;
    std::uint64_t xi_bits;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& key) const {
      return std::hash<std::uint64_t>{}(key.xi_bits * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(key.k));
    }
  };

  PolicySpec policy_;
  GameParams params_;
  std::size_t max_entries_;
  std::unordered_map<Key, RoundDecision, KeyHash> cache_;
};

/// Expected log2(W_N / W_1) of `policy` from prior params.xi0, summing over
/// all 2^N outcome sequences (branches below 1e-15 are pruned).
inline double evaluate_policy_exact(const GameParams& params, const PolicySpec& policy) {
  params.validate();
  if (params.n_steps > 12) throw InstanceTooLarge("exact evaluation is limited to N <= 12");
  DecisionCache decide_at(policy, params);
  const double delta = params.delta.rad();
  auto value = [&](auto&& self, int k, double xi) -> double {
    if (k == params.n_steps) return 0.0;
    const auto d = decide_at(k, Prior(xi));
    const auto b = detail::branch(xi, d.alpha.rad(), delta);
    double v = 0.0;
    if (b.p_up > kNegligibleProbability)
      v += b.p_up * (std::log2(growth_factor(d.fraction, d.bet_on, Outcome::Up)) + self(self, k + 1, b.xi_up));
    if (b.p_down > kNegligibleProbability)
      v += b.p_down * (std::log2(growth_factor(d.fraction, d.bet_on, Outcome::Down)) + self(self, k + 1, b.xi_down));
    return v;
  };
  return value(value, 0, params.xi0.value());
}

}  // namespace qkelly
