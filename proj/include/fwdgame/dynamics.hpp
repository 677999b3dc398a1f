#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fwdgame/game.hpp"
#include "fwdgame/params.hpp"
#include "fwdgame/types.hpp"

// Deterministic analysis of the strategy dynamics: replicator fields for the
// unstructured (USS) and structured (SS) systems, fixed-step integration on
// the simplex, vertex stability via finite-difference Jacobians, closed-form
// cooperation thresholds, the stationary link-type distribution of the
// rewiring process, and basin-of-attraction maps.

namespace fwdgame {

enum class Terminal : int { FF = 0, FD = 1, DD = 2, None = 3 };

inline constexpr std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::FF: return "FF";
    case Terminal::FD: return "FD";
    case Terminal::DD: return "DD";
    case Terminal::None: return "none";
  }
  return "??";
}

// Right-hand side of a strategy-frequency flow, evaluated at a (possibly
// slightly off-simplex) point. Components must sum to zero on the simplex.
using Flow = std::function<std::array<double, 3>(const std::array<double, 3>&)>;

// Velocity of the well-mixed pairwise-comparison dynamics at x, with the
// reputation state re-solved from its closed form at every evaluation.
// Written as beta * x_m (P_m - Pbar) with per-slot payoffs; the factor 2
// relative to beta/2 accounts for the two game slots per round and makes the
// vertex Jacobians match the closed-form eigenvalues after dividing by beta/2.
std::array<double, 3> replicator_rhs_uss(const std::array<double, 3>& x, const GameParams& p);

// Stationary distribution of link types under the rewiring process, given
// strategy frequencies x and breaking probabilities k.
struct LinkTypeDistribution {
  // unordered pair types in order FF-FF, FF-FD, FF-DD, FD-FD, FD-DD, DD-DD
  std::array<double, 6> pi{};
  double normalization = 0.0;  // a(x)

  static int pair_index(int a, int b);
  static std::pair<int, int> pair_of(int index);
  static std::string pair_name(int index);

  std::array<double, 6> expected_counts(long links) const;
};

LinkTypeDistribution stationary_link_distribution(const StrategyDistribution& x,
                                                  const LinkBreakMatrix& k);

// Strategy payoff matrix with every entry divided by the breaking probability
// of the corresponding link type (long-lived links weigh more).
Mat3 link_weighted_payoff_matrix(const GameParams& p, const ReputationState& rep,
                                 const LinkBreakMatrix& k);

// Average fitness f_m = L * a(x) * (M' x)_m of each strategy in the structured
// system, with M' the link-weighted payoff matrix at rep.
std::array<double, 3> fitness_ss(const StrategyDistribution& x, const GameParams& p,
                                 const ReputationState& rep, const LinkBreakMatrix& k);

// Velocity of the structured-system dynamics
//   dx_m/dt = (beta/2) L a(x) x_m ((M'x)_m - x^T M' x),
// reputations re-solved from the closed form at every evaluation.
std::array<double, 3> replicator_rhs_ss(const std::array<double, 3>& x, const GameParams& p,
                                        const LinkBreakMatrix& k);

inline Flow make_uss_flow(const GameParams& p) {
  return [p](const std::array<double, 3>& x) { return replicator_rhs_uss(x, p); };
}

inline Flow make_ss_flow(const GameParams& p, const LinkBreakMatrix& k) {
  return [p, k](const std::array<double, 3>& x) { return replicator_rhs_ss(x, p, k); };
}

struct TrajectorySample {
  double t;
  StrategyDistribution x;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Terminal terminal = Terminal::None;
  double t_end = 0.0;  // time of vertex classification, or t_max if none
};

struct IntegrateOptions {
  double dt = 0.01;
  double t_max = 2000.0;
  double vertex_tol = 1e-3;  // L1 distance for vertex classification
  int sample_stride = 10;    // record every n-th step
};

// Classical fixed-step RK4 on the simplex. After each step negative
// components are clipped to zero and the state renormalized; integration
// stops as soon as the state is within vertex_tol (L1) of a vertex.
// Throws NumericError if the state becomes non-finite.
Trajectory integrate(const Flow& rhs, const StrategyDistribution& x0,
                     const IntegrateOptions& opts = {});

struct VertexReport {
  Strategy vertex;
  std::array<std::array<double, 2>, 2> jacobian{};  // (x1,x2) chart, divided by beta/2
  std::complex<double> lambda1, lambda2;            // ordered by real part, descending
  bool stable = false;                              // both real parts < 0
};

struct VertexStabilityReport {
  std::array<VertexReport, 3> vertices;
  const VertexReport& at(Strategy s) const { return vertices[index_of(s)]; }
};

// Central finite-difference Jacobian (step 1e-6) of the flow in the (x1,x2)
// chart at each vertex, divided by beta/2 so USS values line up with the
// closed-form entries; eigenvalues from the 2x2 characteristic polynomial.
VertexStabilityReport vertex_stability(const Flow& rhs, double beta, double fd_step = 1e-6);

struct ThresholdCondition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  bool degenerate = false;  // ratio form with non-positive denominator
};

// Evaluation of the closed-form cooperation conditions. In the SS the
// benefit-to-cost ratio forms can degenerate (zero/negative denominators);
// the raw payoff-column inequalities are then authoritative and are what the
// ff_cess/fd_cess verdicts are always derived from.
struct ThresholdReport {
  std::string scenario;  // "USS" or "SS"
  double benefit_cost_ratio = 0.0;
  double discrimination = 0.0;  // q = 1-2*mu
  std::vector<ThresholdCondition> conditions;
  bool ff_cess = false;
  bool fd_cess = false;
  bool ratio_raw_agree = true;  // false if a non-degenerate ratio form disagrees with raw

  const ThresholdCondition* find(const std::string& name) const;
};

ThresholdReport uss_cess_thresholds(const GameParams& p);
ThresholdReport ss_cess_thresholds(const GameParams& p, const LinkBreakMatrix& k);

struct BasinPoint {
  double x1_0, x2_0;
  Terminal terminal;
  double t_conv;
};

struct BasinMap {
  int resolution = 0;
  std::vector<BasinPoint> points;            // barycentric grid, row-major in (i,j)
  std::array<double, 3> area_fraction{};     // per vertex; exact-vertex grid points excluded
  double unclassified_fraction = 0.0;
};

// Integrates every barycentric grid point ((res+1)(res+2)/2 of them) to its
// terminal classification. The three grid points that sit exactly on a vertex
// are equilibria by construction and are excluded from the area fractions.
BasinMap compute_basins(const Flow& rhs, int resolution, const IntegrateOptions& opts = {});

}  // namespace fwdgame
