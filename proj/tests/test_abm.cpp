#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fwdgame/abm.hpp"
#include "fwdgame/dynamics.hpp"

using namespace fwdgame;

namespace {

LinkBreakMatrix default_k() {
  return LinkBreakMatrix::from_upper(0.05, 0.25, 0.3, 0.25, 0.95, 0.95);
}

SimConfig base_config(Mode mode) {
  SimConfig cfg;
  cfg.params.b = 4.0;
  cfg.params.c = 2.0;
  cfg.params.p_e = 0.01;
  cfg.params.mu = 0.01;
  cfg.params.beta = 10.0;
  cfg.params.omega = 0.02;
  cfg.params.L = 4;
  cfg.params.N = 100;
  cfg.k = default_k();
  cfg.mode = mode;
  cfg.initial = {0.2, 0.3, 0.5};
  cfg.steps = 200;
  cfg.sample_interval = 50;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("initial roster") {
  SUBCASE("exact proportions via largest remainder") {
    Rng rng(1);
    const auto agents = init_agents(100, {0.2, 0.3, 0.5}, rng);
    const auto counts = strategy_counts(agents);
    CHECK(counts[0] == 20);
    CHECK(counts[1] == 30);
    CHECK(counts[2] == 50);
    for (const Agent& a : agents) CHECK(a.reputation == Reputation::Good);
  }
  SUBCASE("same seed gives the same roster") {
    Rng r1(77), r2(77);
    const auto a1 = init_agents(500, {0.1, 0.6, 0.3}, r1);
    const auto a2 = init_agents(500, {0.1, 0.6, 0.3}, r2);
    for (std::size_t i = 0; i < a1.size(); ++i) CHECK(a1[i].strategy == a2[i].strategy);
  }
  SUBCASE("rounding must not eliminate a configured strategy") {
    Rng rng(5);
    CHECK_THROWS_AS(init_agents(3, {0.001, 0.5, 0.499}, rng), ConfigError);
  }
}

TEST_CASE("ring lattice") {
  const Network net = Network::ring_lattice(100, 4);
  CHECK(net.node_count() == 100);
  CHECK(net.edge_count() == 200);  // H = L*N/2
  for (int v = 0; v < 100; ++v) CHECK(net.degree(v) == 4);
  net.check_invariants();

  SUBCASE("odd degree requires even n and adds the diametral link") {
    const Network odd = Network::ring_lattice(10, 3);
    CHECK(odd.edge_count() == 15);
    for (int v = 0; v < 10; ++v) CHECK(odd.degree(v) == 3);
    CHECK_THROWS_AS(Network::ring_lattice(9, 3), ConfigError);
  }
  SUBCASE("rewire keeps the edge count and adjacency consistent") {
    Network net2 = Network::ring_lattice(10, 4);
    REQUIRE(net2.adjacent(0, 1));
    REQUIRE_FALSE(net2.adjacent(0, 5));
    // edge 0 is (0,1); keep 0, retarget to 5
    const auto [u, v] = net2.edge(0);
    CHECK(u == 0);
    CHECK(v == 1);
    net2.rewire(0, 0, 5);
    CHECK(net2.edge_count() == 20);
    CHECK(net2.adjacent(0, 5));
    CHECK_FALSE(net2.adjacent(0, 1));
    net2.check_invariants();
  }
}

TEST_CASE("single game bookkeeping") {
  GameParams p;
  p.b = 4.0;
  p.c = 2.0;
  p.mu = 0.0;
  Rng rng(3);
  SUBCASE("loss-free cooperation") {
    p.p_e = 0.0;
    Agent provider{0, Strategy::DD, Reputation::Good, 0.0, 0};
    Agent relay{1, Strategy::FF, Reputation::Bad, 0.0, 0};
    const EncounterOutcome out = play_pair(provider, relay, p, rng);
    CHECK(out.action == Action::Forward);
    CHECK(out.delivered);
    CHECK(out.signal == Signal::Forwarded);
    CHECK(provider.payoff_sum == 4.0);
    CHECK(relay.payoff_sum == -2.0);
    CHECK(relay.reputation == Reputation::Good);
    CHECK(provider.interaction_count == 1);
    CHECK(relay.interaction_count == 1);
  }
  SUBCASE("discriminator refuses a bad provider and stays good") {
    p.p_e = 0.0;
    Agent provider{0, Strategy::FF, Reputation::Bad, 0.0, 0};
    Agent relay{1, Strategy::FD, Reputation::Bad, 0.0, 0};
    const EncounterOutcome out = play_pair(provider, relay, p, rng);
    CHECK(out.action == Action::Drop);
    CHECK(out.signal == Signal::Dropped);
    CHECK(provider.payoff_sum == 0.0);
    CHECK(relay.payoff_sum == 0.0);
    CHECK(relay.reputation == Reputation::Good);
  }
  SUBCASE("total loss: the relay pays, the provider gets nothing") {
    p.p_e = 1.0;
    Agent provider{0, Strategy::FF, Reputation::Good, 0.0, 0};
    Agent relay{1, Strategy::FF, Reputation::Good, 0.0, 0};
    const EncounterOutcome out = play_pair(provider, relay, p, rng);
    CHECK(out.action == Action::Forward);
    CHECK_FALSE(out.delivered);
    CHECK(out.signal == Signal::Dropped);
    CHECK(provider.payoff_sum == 0.0);
    CHECK(relay.payoff_sum == -2.0);
  }
}

TEST_CASE("well-mixed rounds") {
  SUBCASE("two mutual cooperators split the surplus") {
    SimConfig cfg = base_config(Mode::USS);
    cfg.params.N = 2;
    cfg.params.L = 1;
    cfg.params.p_e = 0.0;
    cfg.params.mu = 0.0;
    cfg.initial = {1.0, 0.0, 0.0};
    cfg.steps = 10;
    cfg.sample_interval = 1;
    cfg.burn_in_fraction = 0.0;
    cfg.freeze_strategies = true;
    const ReplicateResult res = run_single(cfg, 1);
    // each round both agents net b-c over two games
    CHECK(res.terminal.mean_payoff == doctest::Approx((4.0 - 2.0) / 2.0));
    CHECK(res.terminal.throughput == 1.0);
    CHECK(res.offered == 2 * 10);
    CHECK(res.delivered == res.offered);
  }
  SUBCASE("all defectors earn nothing") {
    SimConfig cfg = base_config(Mode::USS);
    cfg.initial = {0.0, 0.0, 1.0};
    cfg.freeze_strategies = true;
    const ReplicateResult res = run_single(cfg, 1);
    CHECK(res.terminal.mean_payoff == 0.0);
    CHECK(res.terminal.throughput == 0.0);
    CHECK(res.forward_actions == 0);
  }
  SUBCASE("odd N idles one agent per round") {
    SimConfig cfg = base_config(Mode::USS);
    cfg.params.N = 101;
    cfg.steps = 5;
    cfg.sample_interval = 1;
    cfg.burn_in_fraction = 0.0;
    cfg.freeze_strategies = true;
    const ReplicateResult res = run_single(cfg, 1);
    CHECK(res.offered == 5 * 100);  // 50 pairs, two games each, per round
  }
}

TEST_CASE("frozen-strategy reputations reach the closed form") {
  SimConfig cfg = base_config(Mode::USS);
  cfg.params.N = 3000;
  cfg.params.mu = 0.1;
  cfg.initial = {0.3, 0.4, 0.3};
  cfg.freeze_strategies = true;
  cfg.steps = 300;
  cfg.sample_interval = 10;
  cfg.burn_in_fraction = 0.3;
  const ReplicateResult res = run_single(cfg, 2024);
  // average the sampled censuses over the measurement window
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  int n = 0;
  for (const auto& row : res.rows) {
    if (row.t < 100.0) continue;
    r1 += row.rep_ff;
    r2 += row.rep_fd;
    r3 += row.rep_dd;
    ++n;
  }
  r1 /= n;
  r2 /= n;
  r3 /= n;
  const ReputationState closed = stable_reputation(0.1, {0.3, 0.4, 0.3});
  CHECK(std::abs(r1 - closed.r1) < 0.02);
  CHECK(std::abs(r2 - closed.r2) < 0.02);
  CHECK(std::abs(r3 - closed.r3) < 0.02);
  CHECK(closed.r3 == doctest::Approx(0.3194).epsilon(1e-3));

  SUBCASE("error-free labels") {
    SimConfig zero = cfg;
    zero.params.mu = 0.0;
    const ReplicateResult rz = run_single(zero, 77);
    double z1 = 0.0, z3 = 0.0;
    int m = 0;
    for (const auto& row : rz.rows) {
      if (row.t < 100.0) continue;
      z1 += row.rep_ff;
      z3 += row.rep_dd;
      ++m;
    }
    const ReputationState cz = stable_reputation(0.0, {0.3, 0.4, 0.3});
    CHECK(std::abs(z1 / m - 1.0) < 0.02);          // cooperators stay good
    CHECK(std::abs(z3 / m - cz.r3) < 0.02);        // x3/(1+x3)
    CHECK(cz.r3 == doctest::Approx(0.3 / 1.3).epsilon(1e-12));
  }
}

TEST_CASE("rewiring") {
  SUBCASE("frozen strategies relax to the stationary link distribution") {
    SimConfig cfg = base_config(Mode::SS);
    cfg.params.N = 100;
    cfg.initial = {0.5, 0.3, 0.2};
    cfg.freeze_strategies = true;
    cfg.steps = 200000;
    cfg.sample_interval = 100;
    cfg.burn_in_fraction = 0.25;
    const ReplicateResult res = run_single(cfg, 31);
    const LinkTypeDistribution closed = stationary_link_distribution(cfg.initial, cfg.k);
    double tv = 0.0;
    for (int i = 0; i < 6; ++i) tv += std::abs(res.link_type_freq[i] - closed.pi[i]);
    tv *= 0.5;
    CHECK(tv < 0.05);
    CHECK(res.edge_count_constant);
    CHECK(res.population_constant);
    CHECK(res.rewires > 0);
  }
  SUBCASE("a complete graph cancels every break") {
    SimConfig cfg = base_config(Mode::SS);
    cfg.params.N = 4;
    cfg.params.L = 3;  // K4
    cfg.initial = {0.5, 0.25, 0.25};
    cfg.freeze_strategies = true;
    cfg.steps = 1000;
    cfg.sample_interval = 100;
    const ReplicateResult res = run_single(cfg, 8);
    CHECK(res.rewires == 0);
    CHECK(res.rewires_cancelled > 0);
    CHECK(res.edge_count_constant);
  }
}

TEST_CASE("strategy dynamics in the agent model") {
  SUBCASE("an FD-rich well-mixed population fixes on FD") {
    SimConfig cfg = base_config(Mode::USS);
    cfg.params.b = 3.0;
    cfg.params.mu = 0.01;
    cfg.params.N = 500;
    cfg.initial = {0.1, 0.8, 0.1};
    cfg.steps = 3000;
    cfg.sample_interval = 100;
    cfg.replicates = 4;
    cfg.threads = 2;
    const SimRecord record = run_replicates(cfg);
    CHECK(record.terminal_mean.x2 > 0.9);
  }
  SUBCASE("structured co-evolution reaches full cooperation at b=4") {
    SimConfig cfg = base_config(Mode::SS);
    cfg.params.mu = 0.1;
    cfg.params.N = 200;
    cfg.initial = {0.1, 0.8, 0.1};
    cfg.steps = 1500000;
    cfg.sample_interval = 15000;
    cfg.replicates = 4;
    cfg.threads = 2;
    const SimRecord record = run_replicates(cfg);
    CHECK(record.terminal_mean.x1 > 0.9);
    for (const auto& rep : record.replicates) {
      CHECK(rep.edge_count_constant);
      CHECK(rep.population_constant);
    }
  }
}

TEST_CASE("replicate aggregation and determinism") {
  SUBCASE("one replicate equals its own aggregate") {
    SimConfig cfg = base_config(Mode::USS);
    cfg.replicates = 1;
    const SimRecord record = run_replicates(cfg);
    const ReplicateResult single = run_single(cfg, mix_seed(cfg.seed, 0));
    REQUIRE(record.mean_rows.size() == single.rows.size());
    for (std::size_t i = 0; i < single.rows.size(); ++i) {
      CHECK(record.mean_rows[i].x1 == single.rows[i].x1);
      CHECK(record.mean_rows[i].mean_payoff == single.rows[i].mean_payoff);
      CHECK(record.se_rows[i].x1 == 0.0);
    }
  }
  SUBCASE("same config and seed reproduce bit-identical rows") {
    SimConfig cfg = base_config(Mode::SS);
    cfg.replicates = 3;
    const SimRecord a = run_replicates(cfg);
    const SimRecord b = run_replicates(cfg);
    REQUIRE(a.mean_rows.size() == b.mean_rows.size());
    for (std::size_t i = 0; i < a.mean_rows.size(); ++i)
      for (int c = 0; c < 15; ++c)
        CHECK(metric_value(a.mean_rows[i], c) == metric_value(b.mean_rows[i], c));
  }
  SUBCASE("thread count does not change results") {
    SimConfig cfg = base_config(Mode::USS);
    cfg.replicates = 4;
    cfg.threads = 1;
    const SimRecord serial = run_replicates(cfg);
    cfg.threads = 4;
    const SimRecord parallel = run_replicates(cfg);
    for (std::size_t i = 0; i < serial.mean_rows.size(); ++i)
      CHECK(serial.mean_rows[i].x1 == parallel.mean_rows[i].x1);
  }
}

TEST_CASE("payoff accounting identity") {
  SimConfig cfg = base_config(Mode::USS);
  cfg.steps = 500;
  cfg.freeze_strategies = true;
  const ReplicateResult res = run_single(cfg, 7);
  CHECK(res.provider_gain_total == cfg.params.b * static_cast<double>(res.delivered));
  CHECK(res.relay_cost_total == cfg.params.c * static_cast<double>(res.forward_actions));
  CHECK(res.delivered <= res.offered);
  CHECK(res.forward_actions <= res.offered);
  // counters are monotone across rows
  double prev_off = -1.0, prev_del = -1.0;
  for (const auto& row : res.rows) {
    CHECK(row.offered >= prev_off);
    CHECK(row.delivered >= prev_del);
    prev_off = row.offered;
    prev_del = row.delivered;
  }
  CHECK(res.rows.back().offered == static_cast<double>(res.offered));
}
