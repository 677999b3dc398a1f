#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fwdgame/game.hpp"
#include "fwdgame/params.hpp"
#include "fwdgame/rng.hpp"
#include "fwdgame/types.hpp"

// Stochastic agent-based simulation of the forwarding game: random pairing in
// the unstructured system, a co-evolving graph in the structured one, noisy
// per-node reputations, and the run metrics (strategy frequencies, cooperation
// frequency, mean payoff, normalized throughput).

namespace fwdgame {

struct Agent {
  int id = 0;
  Strategy strategy = Strategy::FF;
  Reputation reputation = Reputation::Good;
  double payoff_sum = 0.0;
  long interaction_count = 0;   // games since last strategy revision
  long revision_step = 0;       // sim step of the last strategy revision

  double average_payoff() const {
    return payoff_sum / static_cast<double>(interaction_count > 0 ? interaction_count : 1);
  }
  void reset_payoff(long step = 0) {
    payoff_sum = 0.0;
    interaction_count = 0;
    revision_step = step;
  }
};

// Undirected graph with a fixed number of labelled links. Rewiring replaces
// one endpoint of an existing link, so the link count never changes.
class Network {
 public:
  Network() = default;

  // Circulant ring lattice: node i is linked to i+-1 ... i+-degree/2; an odd
  // degree adds the diametral link (requires even n).
  static Network ring_lattice(int n, int degree);

  int node_count() const { return static_cast<int>(adj_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  std::pair<int, int> edge(int e) const { return edges_[e]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  bool adjacent(int u, int v) const;

  // Replace edge e by (keeper, w). w must not be keeper or one of its neighbors.
  void rewire(int e, int keeper, int w);

  void check_invariants() const;  // throws NumericError on corruption

 private:
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

enum class Mode : int { USS = 0, SS = 1 };

inline constexpr std::string_view to_string(Mode m) { return m == Mode::USS ? "uss" : "ss"; }

struct SimConfig {
  GameParams params;
  LinkBreakMatrix k;
  Mode mode = Mode::USS;
  StrategyDistribution initial{1.0 / 3, 1.0 / 3, 1.0 / 3};
  long steps = 10000;         // USS: rounds; SS: elementary co-evolution steps
  int replicates = 1;
  std::uint64_t seed = 1;
  long sample_interval = 100;
  double burn_in_fraction = 0.1;  // metrics window starts after this fraction
  int imitations_per_round = 0;   // USS; 0 selects max(1, N/50)
  bool freeze_strategies = false;
  int threads = 1;

  void validate() const;
  int imitations() const {
    if (imitations_per_round > 0) return imitations_per_round;
    return params.N >= 50 ? params.N / 50 : 1;
  }
};

struct MetricRow {
  double t = 0.0;
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;
  double x_f = 0.0;
  double mean_payoff = 0.0;  // per game slot, cumulative over the metrics window
  double throughput = 0.0;   // delivered/offered, cumulative over the metrics window
  double payoff_ff = 0.0, payoff_fd = 0.0, payoff_dd = 0.0;
  double rep_ff = 0.0, rep_fd = 0.0, rep_dd = 0.0;  // empirical good-reputation fractions
  double offered = 0.0, delivered = 0.0;            // cumulative counters
};

inline const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols = {
      "t",        "x1",        "x2",        "x3",     "x_f",    "mean_payoff", "throughput",
      "payoff_ff", "payoff_fd", "payoff_dd", "rep_ff", "rep_fd", "rep_dd",      "offered",
      "delivered"};
  return cols;
}

double metric_value(const MetricRow& row, int column);

struct ReplicateResult {
  std::vector<MetricRow> rows;
  MetricRow terminal;  // == rows.back()

  // whole-run accounting
  long long offered = 0;
  long long delivered = 0;
  long long forward_actions = 0;
  double provider_gain_total = 0.0;
  double relay_cost_total = 0.0;
  long long rewires = 0;
  long long rewires_cancelled = 0;

  std::array<double, 6> link_type_freq{};  // SS: time average after burn-in
  bool population_constant = true;
  bool edge_count_constant = true;
};

struct SimRecord {
  SimConfig config;
  std::vector<ReplicateResult> replicates;
  std::vector<MetricRow> mean_rows;
  std::vector<MetricRow> se_rows;  // standard error across replicates
  MetricRow terminal_mean;
  MetricRow terminal_se;
  std::array<double, 6> link_type_freq_mean{};
};

// One seeded replicate; deterministic given (config, seed).
ReplicateResult run_single(const SimConfig& config, std::uint64_t seed);

// Runs config.replicates independent replicates (seeds derived from
// config.seed by replicate index) and aggregates them. Replicates may execute
// on config.threads threads; the aggregation is an index-ordered fold, so the
// result does not depend on scheduling.
SimRecord run_replicates(const SimConfig& config);

// Strategy census helpers.
std::array<int, 3> strategy_counts(const std::vector<Agent>& agents);
StrategyDistribution strategy_frequencies(const std::vector<Agent>& agents);
double cooperation_frequency(const std::vector<Agent>& agents, double mu);

// Initial roster: strategies by largest-remainder rounding of N*x, shuffled;
// all reputations Good. Throws if rounding would eliminate a strategy with
// positive configured frequency.
std::vector<Agent> init_agents(int n, const StrategyDistribution& x, Rng& rng);

struct EncounterOutcome {
  Action action = Action::Drop;
  bool delivered = false;
  Signal signal = Signal::Dropped;
};

// One game: the relay acts on the provider's reputation; a forwarded packet
// is delivered with probability 1-p_e; the relay's reputation is refreshed
// from its actual action with label noise mu. Payoffs and interaction counts
// are updated in place.
EncounterOutcome play_pair(Agent& provider, Agent& relay, const GameParams& p, Rng& rng);

}  // namespace fwdgame
