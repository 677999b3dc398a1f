#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "fwdgame/params.hpp"
#include "fwdgame/rng.hpp"
#include "fwdgame/types.hpp"

// Closed-form game quantities: the social-norm reputation update, its stable
// fixed point, action payoff matrices, expected strategy payoffs in a
// well-mixed population, and the Fermi imitation probability. All functions
// are pure; the noisy update takes an explicit generator.

namespace fwdgame {

using Mat2 = std::array<std::array<double, 2>, 2>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// Noise-free assigned reputation: forwarding always earns Good; dropping earns
// Bad unless the provider was Bad (refusing a bad player is justified).
inline Reputation reputation_update(Reputation provider, Action action) {
  if (action == Action::Forward) return Reputation::Good;
  return provider == Reputation::Good ? Reputation::Bad : Reputation::Good;
}

// With probability mu the assigned label is flipped.
inline Reputation noisy_reputation_update(Reputation provider, Action action, double mu, Rng& rng) {
  Reputation assigned = reputation_update(provider, action);
  if (rng.bernoulli(mu))
    return assigned == Reputation::Good ? Reputation::Bad : Reputation::Good;
  return assigned;
}

// What a relay with the given strategy does to a provider of the given
// reputation. FF forwards always, DD drops always, FD forwards iff Good.
inline Action action_of(Strategy s, Reputation provider) {
  switch (s) {
    case Strategy::FF: return Action::Forward;
    case Strategy::DD: return Action::Drop;
    case Strategy::FD: return provider == Reputation::Good ? Action::Forward : Action::Drop;
  }
  return Action::Drop;
}

// Stable per-class good-reputation frequencies under fast reputation updating:
//   r1* = r2* = 1-mu,  r3* = (1-mu)[1 - q/(1 + q*x3)],  q = 1-2*mu.
// The denominator is >= 1 for all valid inputs.
inline ReputationState stable_reputation(double mu, const StrategyDistribution& x) {
  const double q = 1.0 - 2.0 * mu;
  ReputationState s;
  s.r1 = 1.0 - mu;
  s.r2 = 1.0 - mu;
  s.r3 = (1.0 - mu) * (1.0 - q / (1.0 + q * x.x3));
  s.r = x.x1 * s.r1 + x.x2 * s.r2 + x.x3 * s.r3;
  return s;
}

// One step of the reputation relaxation map. Each class keeps its label with
// probability 1/2 (provider role) and refreshes it in the relay role:
// cooperating classes earn Good up to the mu error, unconditional defectors
// earn Good exactly when the provider was Bad (again up to mu). Iterating this
// converges to stable_reputation's closed form; it is kept as a test oracle.
inline ReputationState reputation_recursion_step(const ReputationState& state,
                                                 const StrategyDistribution& x, double mu) {
  const double r = x.x1 * state.r1 + x.x2 * state.r2 + x.x3 * state.r3;
  ReputationState next;
  next.r1 = 0.5 * state.r1 + 0.5 * (1.0 - mu);
  next.r2 = 0.5 * state.r2 + 0.5 * (1.0 - mu);
  next.r3 = 0.5 * state.r3 + 0.5 * ((1.0 - mu) * (1.0 - r) + r * mu);
  next.r = x.x1 * next.r1 + x.x2 * next.r2 + x.x3 * next.r3;
  return next;
}

// 2x2 forward/drop payoff matrix on a loss-free channel (row: own action).
inline Mat2 action_payoff_matrix(double b, double c) {
  return {{{b - c, -c}, {b, 0.0}}};
}

// Same under channel loss: the provider's gain realizes with prob 1-p_e.
inline Mat2 action_payoff_matrix(const GameParams& p) {
  const double gain = p.delivery_gain();
  return {{{gain - p.c, -p.c}, {gain, 0.0}}};
}

// Expected per-slot payoffs (P1,P2,P3) of FF/FD/DD in a well-mixed population
// with reputation state rep (normally stable_reputation(mu,x)). Each player is
// relay half the time (paying the forwarding cost) and provider half the time
// (earning b(1-p_e) when the partner relays for it).
inline std::array<double, 3> expected_payoffs_uss(const GameParams& p,
                                                  const StrategyDistribution& x,
                                                  const ReputationState& rep) {
  const double gain = p.delivery_gain();
  const double provider_ff = gain * x.x1 + gain * rep.r1 * x.x2;
  const double provider_fd = gain * x.x1 + gain * rep.r2 * x.x2;
  const double provider_dd = gain * x.x1 + gain * rep.r3 * x.x2;
  return {
      0.5 * (-p.c) + 0.5 * provider_ff,
      0.5 * rep.r * (-p.c) + 0.5 * provider_fd,
      0.5 * provider_dd,
  };
}

// 3x3 per-round payoff matrix between strategies (row: own strategy).
inline Mat3 strategy_payoff_matrix(const GameParams& p, const ReputationState& rep) {
  const double gain = p.delivery_gain();
  const double c = p.c;
  return {{
      {gain - c, -c + rep.r1 * gain, -c},
      {rep.r * (-c) + gain, rep.r * (-c) + rep.r2 * gain, rep.r * (-c)},
      {gain, rep.r3 * gain, 0.0},
  }};
}

// Logistic imitation probability 1/(1+exp(-beta*(p_i-p_j))). The exponent is
// clamped at +-700 to stay inside double range; this preserves monotonicity
// and the open (0,1) range for finite inputs.
inline double fermi_probability(double p_i, double p_j, double beta) {
  double z = -beta * (p_i - p_j);
  z = std::clamp(z, -700.0, 700.0);
  return 1.0 / (1.0 + std::exp(z));
}

// Frequency of cooperative interactions: FF always cooperates, FD cooperates
// with the (1-mu) good-reputation share of providers it faces.
inline double cooperation_frequency(const StrategyDistribution& x, double mu) {
  return x.x1 + x.x2 * (1.0 - mu);
}

// Unconditional-forwarding reference point: expected per-game payoff and
// delivered fraction when every relay forwards.
struct CooperationBaseline {
  double payoff;
  double throughput;
};

inline CooperationBaseline full_cooperation_baseline(const GameParams& p) {
  return {0.5 * (p.delivery_gain() - p.c), 1.0 - p.p_e};
}

}  // namespace fwdgame
