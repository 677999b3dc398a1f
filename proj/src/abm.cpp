#include "fwdgame/abm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "fwdgame/dynamics.hpp"

namespace fwdgame {

Network Network::ring_lattice(int n, int degree) {
  if (degree < 1 || degree >= n)
    throw ConfigError("ring lattice requires 1 <= degree < n");
  if ((static_cast<long long>(n) * degree) % 2 != 0)
    throw ConfigError("ring lattice requires n*degree even");
  Network net;
  net.adj_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int d = 1; d <= degree / 2; ++d) {
      const int j = (i + d) % n;
      net.edges_.emplace_back(i, j);
      net.adj_[i].push_back(j);
      net.adj_[j].push_back(i);
    }
  }
  if (degree % 2 == 1) {
    for (int i = 0; i < n / 2; ++i) {
      const int j = i + n / 2;
      net.edges_.emplace_back(i, j);
      net.adj_[i].push_back(j);
      net.adj_[j].push_back(i);
    }
  }
  return net;
}

bool Network::adjacent(int u, int v) const {
  const auto& nb = adj_[u];
  return std::find(nb.begin(), nb.end(), v) != nb.end();
}

void Network::rewire(int e, int keeper, int w) {
  auto [u, v] = edges_[e];
  const int other = (keeper == u) ? v : u;
  auto drop = [&](int from, int who) {
    auto& nb = adj_[from];
    nb.erase(std::find(nb.begin(), nb.end(), who));
  };
  drop(keeper, other);
  drop(other, keeper);
  edges_[e] = {keeper, w};
  adj_[keeper].push_back(w);
  adj_[w].push_back(keeper);
}

void Network::check_invariants() const {
  long long degree_sum = 0;
  for (const auto& nb : adj_) degree_sum += static_cast<long long>(nb.size());
  if (degree_sum != 2LL * edge_count())
    throw NumericError("network corrupted: degree sum != 2*edges");
  for (const auto& [u, v] : edges_) {
    if (u == v) throw NumericError("network corrupted: self-loop");
    if (!adjacent(u, v) || !adjacent(v, u))
      throw NumericError("network corrupted: edge missing from adjacency");
  }
  for (int u = 0; u < node_count(); ++u) {
    auto nb = adj_[u];
    std::sort(nb.begin(), nb.end());
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
      throw NumericError("network corrupted: duplicate edge");
  }
}

void SimConfig::validate() const {
  params.validate(mode == Mode::SS);
  k.validate();
  initial.require_on_simplex();
  if (steps <= 0) throw ConfigError("sim: steps must be positive");
  if (replicates < 1) throw ConfigError("sim: replicates must be >= 1");
  if (sample_interval <= 0) throw ConfigError("sim: sample_interval must be positive");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
    throw ConfigError("sim: burn_in_fraction must be in [0,1)");
  if (imitations_per_round < 0) throw ConfigError("sim: imitations_per_round must be >= 0");
  if (threads < 1) throw ConfigError("sim: threads must be >= 1");
}

double metric_value(const MetricRow& row, int column) {
  switch (column) {
    case 0: return row.t;
    case 1: return row.x1;
    case 2: return row.x2;
    case 3: return row.x3;
    case 4: return row.x_f;
    case 5: return row.mean_payoff;
    case 6: return row.throughput;
    case 7: return row.payoff_ff;
    case 8: return row.payoff_fd;
    case 9: return row.payoff_dd;
    case 10: return row.rep_ff;
    case 11: return row.rep_fd;
    case 12: return row.rep_dd;
    case 13: return row.offered;
    case 14: return row.delivered;
  }
  return 0.0;
}

namespace {

void set_metric(MetricRow& row, int column, double v) {
  switch (column) {
    case 0: row.t = v; break;
    case 1: row.x1 = v; break;
    case 2: row.x2 = v; break;
    case 3: row.x3 = v; break;
    case 4: row.x_f = v; break;
    case 5: row.mean_payoff = v; break;
    case 6: row.throughput = v; break;
    case 7: row.payoff_ff = v; break;
    case 8: row.payoff_fd = v; break;
    case 9: row.payoff_dd = v; break;
    case 10: row.rep_ff = v; break;
    case 11: row.rep_fd = v; break;
    case 12: row.rep_dd = v; break;
    case 13: row.offered = v; break;
    case 14: row.delivered = v; break;
  }
}

}  // namespace

std::array<int, 3> strategy_counts(const std::vector<Agent>& agents) {
  std::array<int, 3> counts{};
  for (const Agent& a : agents) ++counts[index_of(a.strategy)];
  return counts;
}

StrategyDistribution strategy_frequencies(const std::vector<Agent>& agents) {
  const auto counts = strategy_counts(agents);
  const double n = static_cast<double>(agents.size());
  return {counts[0] / n, counts[1] / n, counts[2] / n};
}

double cooperation_frequency(const std::vector<Agent>& agents, double mu) {
  const auto counts = strategy_counts(agents);
  const double n = static_cast<double>(agents.size());
  return counts[0] / n + (1.0 - mu) * counts[1] / n;
}

std::vector<Agent> init_agents(int n, const StrategyDistribution& x, Rng& rng) {
  x.require_on_simplex();
  std::array<long, 3> counts{};
  std::array<double, 3> remainder{};
  long assigned = 0;
  for (int m = 0; m < 3; ++m) {
    const double exact = x[m] * n;
    counts[m] = static_cast<long>(std::floor(exact));
    remainder[m] = exact - static_cast<double>(counts[m]);
    assigned += counts[m];
  }
  while (assigned < n) {
    int best = 0;
    for (int m = 1; m < 3; ++m)
      if (remainder[m] > remainder[best]) best = m;
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  for (int m = 0; m < 3; ++m)
    if (x[m] > 0.0 && counts[m] == 0)
      throw ConfigError("population too small: rounding eliminates strategy " +
                        std::string(to_string(static_cast<Strategy>(m))));

  std::vector<Agent> agents(n);
  int pos = 0;
  for (int m = 0; m < 3; ++m)
    for (long i = 0; i < counts[m]; ++i) agents[pos++].strategy = static_cast<Strategy>(m);
  // Fisher-Yates over the strategy labels keeps agent ids stable
  for (int i = n; i > 1; --i) {
    const int j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i)));
    std::swap(agents[i - 1].strategy, agents[j].strategy);
  }
  for (int i = 0; i < n; ++i) agents[i].id = i;
  return agents;
}

namespace {

// One game with the provider's reputation pinned to a caller-chosen label.
// Both sessions of a stage act on stage-entry labels, so the within-pair
// reputation updates cannot feed each other.
EncounterOutcome play_game(Agent& provider, Reputation provider_rep, Agent& relay,
                           const GameParams& p, Rng& rng) {
  EncounterOutcome out;
  out.action = action_of(relay.strategy, provider_rep);
  if (out.action == Action::Forward) {
    relay.payoff_sum -= p.c;
    out.delivered = !rng.bernoulli(p.p_e);
    if (out.delivered) provider.payoff_sum += p.b;
    out.signal = out.delivered ? Signal::Forwarded : Signal::Dropped;
  } else {
    out.delivered = false;
    out.signal = Signal::Dropped;
  }
  relay.reputation = noisy_reputation_update(provider_rep, out.action, p.mu, rng);
  ++provider.interaction_count;
  ++relay.interaction_count;
  return out;
}

}  // namespace

EncounterOutcome play_pair(Agent& provider, Agent& relay, const GameParams& p, Rng& rng) {
  return play_game(provider, provider.reputation, relay, p, rng);
}

namespace {

// Window accumulators for the metric columns. Reset once at the burn-in
// boundary so reported values cover the measurement window only.
struct Accounting {
  long long offered = 0;
  long long delivered = 0;
  long long forward_actions = 0;
  double payoff_total = 0.0;
  long long participations = 0;
  std::array<double, 3> payoff_by_strategy{};
  std::array<long long, 3> participations_by_strategy{};

  void record(const Agent& provider, const Agent& relay, const EncounterOutcome& out,
              const GameParams& p) {
    ++offered;
    participations += 2;
    ++participations_by_strategy[index_of(provider.strategy)];
    ++participations_by_strategy[index_of(relay.strategy)];
    if (out.action == Action::Forward) {
      ++forward_actions;
      payoff_total -= p.c;
      payoff_by_strategy[index_of(relay.strategy)] -= p.c;
    }
    if (out.delivered) {
      ++delivered;
      payoff_total += p.b;
      payoff_by_strategy[index_of(provider.strategy)] += p.b;
    }
  }
};

class Simulation {
 public:
  Simulation(const SimConfig& config, std::uint64_t seed)
      : cfg_(config), rng_(seed), agents_(init_agents(config.params.N, config.initial, rng_)) {
    if (cfg_.mode == Mode::SS) {
      net_ = Network::ring_lattice(cfg_.params.N, cfg_.params.L);
      expected_edges_ = net_.edge_count();
    }
    order_.resize(agents_.size());
    std::iota(order_.begin(), order_.end(), 0);
  }

  ReplicateResult run() {
    ReplicateResult res;
    const long burn_in_step = static_cast<long>(cfg_.burn_in_fraction * cfg_.steps);
    bool window_reset = burn_in_step == 0;
    sample(res, 0);
    for (long step = 1; step <= cfg_.steps; ++step) {
      current_step_ = step;
      if (!window_reset && step > burn_in_step) {
        window_ = Accounting{};
        link_freq_acc_.fill(0.0);
        link_freq_samples_ = 0;
        window_reset = true;
      }
      if (cfg_.mode == Mode::USS)
        uss_round();
      else
        ss_step(res);
      if (step % cfg_.sample_interval == 0 || step == cfg_.steps) sample(res, step);
      if (cfg_.mode == Mode::SS && step % 100000 == 0) net_.check_invariants();
    }
    finalize(res);
    return res;
  }

 private:
  // both sessions of a stage (a's packet through b, b's packet through a) run
  // on the stage-entry reputations
  void play_stage(Agent& a, Agent& b) {
    const Reputation rep_a = a.reputation;
    const Reputation rep_b = b.reputation;
    record(a, b, play_game(a, rep_a, b, cfg_.params, rng_));
    record(b, a, play_game(b, rep_b, a, cfg_.params, rng_));
  }

  void uss_round() {
    rng_.shuffle(order_);
    const std::size_t pairs = agents_.size() / 2;  // odd N: the last agent idles
    for (std::size_t i = 0; i < pairs; ++i)
      play_stage(agents_[order_[2 * i]], agents_[order_[2 * i + 1]]);
    if (cfg_.freeze_strategies) return;
    const int events = cfg_.imitations();
    const int n = static_cast<int>(agents_.size());
    for (int e = 0; e < events; ++e) {
      const int i = rng_.index(n);
      int j = rng_.index(n - 1);
      if (j >= i) ++j;
      imitate(agents_[i], agents_[j]);
    }
  }

  // Packet traffic flows on the graph at every step: one random link carries
  // a stage (both directions). Reputations and payoff averages therefore
  // relax much faster than strategies change (omega per step), which the
  // stable-reputation analysis assumes. The co-evolution clock then picks a
  // strategy event with probability omega, a rewiring step otherwise.
  void ss_step(ReplicateResult& res) {
    {
      const int e = rng_.index(net_.edge_count());
      auto [u, v] = net_.edge(e);
      play_stage(agents_[u], agents_[v]);
    }
    if (!cfg_.freeze_strategies && rng_.bernoulli(cfg_.params.omega)) {
      const int e = rng_.index(net_.edge_count());
      auto [u, v] = net_.edge(e);
      Agent& a = agents_[u];
      Agent& b = agents_[v];
      play_stage(a, b);  // fresh payoffs for the comparison below
      if (rng_.bernoulli(0.5))
        imitate(a, b);
      else
        imitate(b, a);
    } else {
      rewire(res);
    }
  }

  // Payoff entering the Fermi comparison. Well-mixed agents play the same
  // number of games per round, so the per-game average is the right quantity.
  // On the graph, payoff accrues per unit time in proportion to how many
  // links an agent holds and how long they last, which is exactly what the
  // link-weighted fitness measures; the per-step rate (scaled by the link
  // count so its magnitude matches the fitness function) preserves that.
  double comparison_payoff(const Agent& a) const {
    if (cfg_.mode == Mode::USS) return a.average_payoff();
    const long alive = std::max<long>(1, current_step_ - a.revision_step);
    return a.payoff_sum * static_cast<double>(expected_edges_) / static_cast<double>(alive);
  }

  // strategy of model replaces imitator's with the Fermi probability
  void imitate(Agent& model, Agent& imitator) {
    const double p =
        fermi_probability(comparison_payoff(model), comparison_payoff(imitator), cfg_.params.beta);
    if (rng_.bernoulli(p) && model.strategy != imitator.strategy) {
      imitator.strategy = model.strategy;
      imitator.reset_payoff(current_step_);
    }
  }

  void rewire(ReplicateResult& res) {
    const int e = rng_.index(net_.edge_count());
    auto [u, v] = net_.edge(e);
    const double kk = cfg_.k(agents_[u].strategy, agents_[v].strategy);
    if (!rng_.bernoulli(kk)) return;
    const int keeper = rng_.bernoulli(0.5) ? u : v;
    const int n = net_.node_count();
    if (net_.degree(keeper) >= n - 1) {
      ++res.rewires_cancelled;  // keeper already linked to everyone
      return;
    }
    int w;
    do {
      w = rng_.index(n);
    } while (w == keeper || net_.adjacent(keeper, w));
    net_.rewire(e, keeper, w);
    ++res.rewires;
  }

  void record(const Agent& provider, const Agent& relay, const EncounterOutcome& out) {
    window_.record(provider, relay, out, cfg_.params);
    total_.record(provider, relay, out, cfg_.params);
  }

  void sample(ReplicateResult& res, long step) {
    MetricRow row;
    row.t = static_cast<double>(step);
    const auto counts = strategy_counts(agents_);
    const double n = static_cast<double>(agents_.size());
    row.x1 = counts[0] / n;
    row.x2 = counts[1] / n;
    row.x3 = counts[2] / n;
    row.x_f = row.x1 + (1.0 - cfg_.params.mu) * row.x2;
    row.mean_payoff =
        window_.participations > 0 ? window_.payoff_total / window_.participations : 0.0;
    row.throughput =
        window_.offered > 0 ? static_cast<double>(window_.delivered) / window_.offered : 0.0;
    const double* pays = window_.payoff_by_strategy.data();
    const long long* parts = window_.participations_by_strategy.data();
    row.payoff_ff = parts[0] > 0 ? pays[0] / parts[0] : 0.0;
    row.payoff_fd = parts[1] > 0 ? pays[1] / parts[1] : 0.0;
    row.payoff_dd = parts[2] > 0 ? pays[2] / parts[2] : 0.0;
    std::array<long, 3> good{};
    for (const Agent& a : agents_)
      if (a.reputation == Reputation::Good) ++good[index_of(a.strategy)];
    row.rep_ff = counts[0] > 0 ? static_cast<double>(good[0]) / counts[0] : 0.0;
    row.rep_fd = counts[1] > 0 ? static_cast<double>(good[1]) / counts[1] : 0.0;
    row.rep_dd = counts[2] > 0 ? static_cast<double>(good[2]) / counts[2] : 0.0;
    row.offered = static_cast<double>(total_.offered);  // cumulative, monotone
    row.delivered = static_cast<double>(total_.delivered);
    res.rows.push_back(row);

    if (cfg_.mode == Mode::SS) {
      if (static_cast<int>(agents_.size()) != cfg_.params.N) res.population_constant = false;
      if (net_.edge_count() != expected_edges_) res.edge_count_constant = false;
      std::array<long, 6> tc{};
      for (int e = 0; e < net_.edge_count(); ++e) {
        auto [u, v] = net_.edge(e);
        ++tc[LinkTypeDistribution::pair_index(index_of(agents_[u].strategy),
                                              index_of(agents_[v].strategy))];
      }
      for (int i = 0; i < 6; ++i)
        link_freq_acc_[i] += static_cast<double>(tc[i]) / net_.edge_count();
      ++link_freq_samples_;
    }
  }

  void finalize(ReplicateResult& res) {
    res.terminal = res.rows.back();
    res.offered = total_.offered;
    res.delivered = total_.delivered;
    res.forward_actions = total_.forward_actions;
    res.provider_gain_total = static_cast<double>(total_.delivered) * cfg_.params.b;
    res.relay_cost_total = static_cast<double>(total_.forward_actions) * cfg_.params.c;
    // cross-check the per-event payoff stream against the counter identity
    const double stream = total_.payoff_total;
    const double from_counters = res.provider_gain_total - res.relay_cost_total;
    if (std::abs(stream - from_counters) >
        1e-9 * (1.0 + std::abs(stream) + std::abs(from_counters)))
      throw NumericError("payoff accounting identity violated");
    if (static_cast<int>(agents_.size()) != cfg_.params.N) res.population_constant = false;
    if (cfg_.mode == Mode::SS) {
      net_.check_invariants();
      if (net_.edge_count() != expected_edges_) res.edge_count_constant = false;
      if (link_freq_samples_ > 0)
        for (int i = 0; i < 6; ++i) res.link_type_freq[i] = link_freq_acc_[i] / link_freq_samples_;
    }
  }

  SimConfig cfg_;
  Rng rng_;
  std::vector<Agent> agents_;
  std::vector<int> order_;
  Network net_;
  int expected_edges_ = 0;
  long current_step_ = 0;
  Accounting window_;
  Accounting total_;
  std::array<double, 6> link_freq_acc_{};
  long link_freq_samples_ = 0;
};

}  // namespace

ReplicateResult run_single(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  Simulation sim(config, seed);
  return sim.run();
}

SimRecord run_replicates(const SimConfig& config) {
  config.validate();
  SimRecord record;
  record.config = config;
  record.replicates.resize(config.replicates);

  const int workers = std::min<int>(config.threads, config.replicates);
  if (workers <= 1) {
    for (int r = 0; r < config.replicates; ++r)
      record.replicates[r] = run_single(config, mix_seed(config.seed, r));
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (int r = w; r < config.replicates; r += workers)
            record.replicates[r] = run_single(config, mix_seed(config.seed, r));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  const std::size_t n_rows = record.replicates.front().rows.size();
  const int n_cols = static_cast<int>(metric_columns().size());
  const double n_rep = static_cast<double>(config.replicates);
  record.mean_rows.resize(n_rows);
  record.se_rows.resize(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (int col = 0; col < n_cols; ++col) {
      double mean = 0.0;
      for (const auto& rep : record.replicates) mean += metric_value(rep.rows[i], col);
      mean /= n_rep;
      double var = 0.0;
      for (const auto& rep : record.replicates) {
        const double d = metric_value(rep.rows[i], col) - mean;
        var += d * d;
      }
      const double se =
          config.replicates > 1 ? std::sqrt(var / (n_rep * (n_rep - 1.0))) : 0.0;
      set_metric(record.mean_rows[i], col, mean);
      set_metric(record.se_rows[i], col, se);
    }
  }
  record.terminal_mean = record.mean_rows.back();
  record.terminal_se = record.se_rows.back();
  for (int i = 0; i < 6; ++i) {
    double mean = 0.0;
    for (const auto& rep : record.replicates) mean += rep.link_type_freq[i];
    record.link_type_freq_mean[i] = mean / n_rep;
  }
  return record;
}

}  // namespace fwdgame
