#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fwdgame/abm.hpp"
#include "fwdgame/dynamics.hpp"
#include "fwdgame/experiment.hpp"
#include "fwdgame/game.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace fwdgame;

namespace {

StrategyDistribution dist_from_tuple(const std::array<double, 3>& a) {
  StrategyDistribution d = StrategyDistribution::from_array(a);
  d.require_on_simplex();
  return d;
}

py::dict trajectory_to_dict(const Trajectory& traj) {
  py::list times, points;
  for (const auto& s : traj.samples) {
    times.append(s.t);
    points.append(py::make_tuple(s.x.x1, s.x.x2, s.x.x3));
  }
  return py::dict("t"_a = times, "x"_a = points,
                  "terminal"_a = std::string(to_string(traj.terminal)), "t_end"_a = traj.t_end);
}

py::dict threshold_to_dict(const ThresholdReport& rep) {
  py::list conds;
  for (const auto& c : rep.conditions)
    conds.append(py::dict("name"_a = c.name, "lhs"_a = c.lhs, "rhs"_a = c.rhs,
                          "satisfied"_a = c.satisfied, "degenerate"_a = c.degenerate));
  return py::dict("scenario"_a = rep.scenario, "benefit_cost_ratio"_a = rep.benefit_cost_ratio,
                  "discrimination"_a = rep.discrimination, "ff_cess"_a = rep.ff_cess,
                  "fd_cess"_a = rep.fd_cess, "ratio_raw_agree"_a = rep.ratio_raw_agree,
                  "conditions"_a = conds);
}

py::dict record_to_dict(const SimRecord& record) {
  const auto& cols = metric_columns();
  py::dict mean, se;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    py::list mvals, svals;
    for (std::size_t i = 0; i < record.mean_rows.size(); ++i) {
      mvals.append(metric_value(record.mean_rows[i], static_cast<int>(c)));
      svals.append(metric_value(record.se_rows[i], static_cast<int>(c)));
    }
    mean[py::str(cols[c])] = mvals;
    se[py::str(cols[c])] = svals;
  }
  py::dict terminal;
  for (std::size_t c = 0; c < cols.size(); ++c)
    terminal[py::str(cols[c])] = metric_value(record.terminal_mean, static_cast<int>(c));
  py::list link_freq;
  for (double v : record.link_type_freq_mean) link_freq.append(v);
  return py::dict("mean"_a = mean, "se"_a = se, "terminal"_a = terminal,
                  "link_type_freq"_a = link_freq,
                  "replicates"_a = static_cast<int>(record.replicates.size()));
}

IntegrateOptions make_opts(double dt, double t_max, double vertex_tol) {
  IntegrateOptions opts;
  opts.dt = dt;
  opts.t_max = t_max;
  opts.vertex_tol = vertex_tol;
  return opts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "evolutionary packet-forwarding game toolkit";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<NumericError>(m, "NumericalError");

  py::class_<GameParams>(m, "GameParams")
      .def(py::init([](double b, double c, double p_e, double mu, double beta, double omega,
                       int L, int N) {
             GameParams p{b, c, p_e, mu, beta, omega, L, N};
             p.validate();
             return p;
           }),
           "b"_a, "c"_a, "p_e"_a, "mu"_a, "beta"_a = 10.0, "omega"_a = 0.02, "L"_a = 4,
           "N"_a = 100)
      .def_readwrite("b", &GameParams::b)
      .def_readwrite("c", &GameParams::c)
      .def_readwrite("p_e", &GameParams::p_e)
      .def_readwrite("mu", &GameParams::mu)
      .def_readwrite("beta", &GameParams::beta)
      .def_readwrite("omega", &GameParams::omega)
      .def_readwrite("L", &GameParams::L)
      .def_readwrite("N", &GameParams::N)
      .def("validate", [](const GameParams& p, bool structured) { p.validate(structured); },
           "structured"_a = false);

  py::class_<LinkBreakMatrix>(m, "LinkBreakMatrix")
      .def(py::init(&LinkBreakMatrix::from_upper), "k11"_a, "k12"_a, "k13"_a, "k22"_a, "k23"_a,
           "k33"_a)
      .def("__call__",
           [](const LinkBreakMatrix& k, int a, int b) {
             if (a < 0 || a > 2 || b < 0 || b > 2) throw py::index_error();
             return k(a, b);
           });

  py::class_<ReputationState>(m, "ReputationState")
      .def_readonly("r1", &ReputationState::r1)
      .def_readonly("r2", &ReputationState::r2)
      .def_readonly("r3", &ReputationState::r3)
      .def_readonly("r", &ReputationState::r)
      .def("__repr__", [](const ReputationState& s) {
        return "ReputationState(r1=" + format_double(s.r1) + ", r2=" + format_double(s.r2) +
               ", r3=" + format_double(s.r3) + ", r=" + format_double(s.r) + ")";
      });

  m.def(
      "stable_reputation",
      [](double mu, const std::array<double, 3>& x) {
        return stable_reputation(mu, dist_from_tuple(x));
      },
      "mu"_a, "x"_a);

  m.def(
      "reputation_update",
      [](const std::string& provider, const std::string& action) {
        const Reputation rep = provider == "Good" ? Reputation::Good
                               : provider == "Bad"
                                   ? Reputation::Bad
                                   : throw ConfigError("reputation must be Good or Bad");
        const Action act = action == "Forward" ? Action::Forward
                           : action == "Drop" ? Action::Drop
                                              : throw ConfigError("action must be Forward or Drop");
        return reputation_update(rep, act) == Reputation::Good ? "Good" : "Bad";
      },
      "provider"_a, "action"_a);

  m.def(
      "action_of",
      [](const std::string& strategy, const std::string& provider) {
        const Reputation rep = provider == "Good" ? Reputation::Good
                               : provider == "Bad"
                                   ? Reputation::Bad
                                   : throw ConfigError("reputation must be Good or Bad");
        return action_of(strategy_from_string(strategy), rep) == Action::Forward ? "Forward"
                                                                                 : "Drop";
      },
      "strategy"_a, "provider"_a);

  m.def(
      "reputation_recursion_step",
      [](const std::array<double, 3>& r, const std::array<double, 3>& x, double mu) {
        const ReputationState state{r[0], r[1], r[2], 0.0};
        return reputation_recursion_step(state, dist_from_tuple(x), mu);
      },
      "r"_a, "x"_a, "mu"_a);

  m.def(
      "vertex_stability_uss",
      [](const GameParams& p) {
        const VertexStabilityReport rep = vertex_stability(make_uss_flow(p), p.beta);
        py::dict out;
        for (const auto& v : rep.vertices)
          out[py::str(std::string(to_string(v.vertex)))] =
              py::dict("jacobian"_a = v.jacobian, "eigenvalues"_a =
                           py::make_tuple(v.lambda1, v.lambda2), "stable"_a = v.stable);
        return out;
      },
      "params"_a);

  m.def(
      "vertex_stability_ss",
      [](const GameParams& p, const LinkBreakMatrix& k) {
        const VertexStabilityReport rep = vertex_stability(make_ss_flow(p, k), p.beta);
        py::dict out;
        for (const auto& v : rep.vertices)
          out[py::str(std::string(to_string(v.vertex)))] =
              py::dict("jacobian"_a = v.jacobian, "eigenvalues"_a =
                           py::make_tuple(v.lambda1, v.lambda2), "stable"_a = v.stable);
        return out;
      },
      "params"_a, "k"_a);

  m.def(
      "expected_payoffs_uss",
      [](const GameParams& p, const std::array<double, 3>& x) {
        const StrategyDistribution d = dist_from_tuple(x);
        return expected_payoffs_uss(p, d, stable_reputation(p.mu, d));
      },
      "params"_a, "x"_a);

  m.def("fermi_probability", &fermi_probability, "p_i"_a, "p_j"_a, "beta"_a);

  m.def(
      "cooperation_frequency",
      [](const std::array<double, 3>& x, double mu) {
        return cooperation_frequency(dist_from_tuple(x), mu);
      },
      "x"_a, "mu"_a);

  m.def("action_payoff_matrix",
        [](const GameParams& p) { return action_payoff_matrix(p); }, "params"_a);

  m.def(
      "strategy_payoff_matrix",
      [](const GameParams& p, const std::array<double, 3>& x) {
        const StrategyDistribution d = dist_from_tuple(x);
        return strategy_payoff_matrix(p, stable_reputation(p.mu, d));
      },
      "params"_a, "x"_a);

  m.def(
      "link_weighted_payoff_matrix",
      [](const GameParams& p, const std::array<double, 3>& x, const LinkBreakMatrix& k) {
        const StrategyDistribution d = dist_from_tuple(x);
        return link_weighted_payoff_matrix(p, stable_reputation(p.mu, d), k);
      },
      "params"_a, "x"_a, "k"_a);

  m.def(
      "stationary_link_distribution",
      [](const std::array<double, 3>& x, const LinkBreakMatrix& k) {
        const LinkTypeDistribution d = stationary_link_distribution(dist_from_tuple(x), k);
        py::dict out;
        for (int i = 0; i < 6; ++i)
          out[py::str(LinkTypeDistribution::pair_name(i))] = d.pi[i];
        return py::make_tuple(out, d.normalization);
      },
      "x"_a, "k"_a);

  m.def("uss_cess_thresholds",
        [](const GameParams& p) { return threshold_to_dict(uss_cess_thresholds(p)); },
        "params"_a);
  m.def(
      "ss_cess_thresholds",
      [](const GameParams& p, const LinkBreakMatrix& k) {
        return threshold_to_dict(ss_cess_thresholds(p, k));
      },
      "params"_a, "k"_a);

  m.def(
      "integrate_uss",
      [](const GameParams& p, const std::array<double, 3>& x0, double dt, double t_max,
         double vertex_tol) {
        return trajectory_to_dict(
            integrate(make_uss_flow(p), dist_from_tuple(x0), make_opts(dt, t_max, vertex_tol)));
      },
      "params"_a, "x0"_a, "dt"_a = 0.01, "t_max"_a = 2000.0, "vertex_tol"_a = 1e-3);

  m.def(
      "integrate_ss",
      [](const GameParams& p, const LinkBreakMatrix& k, const std::array<double, 3>& x0,
         double dt, double t_max, double vertex_tol) {
        return trajectory_to_dict(
            integrate(make_ss_flow(p, k), dist_from_tuple(x0), make_opts(dt, t_max, vertex_tol)));
      },
      "params"_a, "k"_a, "x0"_a, "dt"_a = 0.01, "t_max"_a = 2000.0, "vertex_tol"_a = 1e-3);

  m.def(
      "compute_basins_uss",
      [](const GameParams& p, int resolution) {
        const BasinMap map = compute_basins(make_uss_flow(p), resolution);
        py::list points;
        for (const auto& pt : map.points)
          points.append(py::make_tuple(pt.x1_0, pt.x2_0, std::string(to_string(pt.terminal)),
                                       pt.t_conv));
        return py::dict("points"_a = points, "area_fraction"_a = map.area_fraction,
                        "unclassified"_a = map.unclassified_fraction);
      },
      "params"_a, "resolution"_a = 40);

  m.def(
      "compute_basins_ss",
      [](const GameParams& p, const LinkBreakMatrix& k, int resolution) {
        const BasinMap map = compute_basins(make_ss_flow(p, k), resolution);
        py::list points;
        for (const auto& pt : map.points)
          points.append(py::make_tuple(pt.x1_0, pt.x2_0, std::string(to_string(pt.terminal)),
                                       pt.t_conv));
        return py::dict("points"_a = points, "area_fraction"_a = map.area_fraction,
                        "unclassified"_a = map.unclassified_fraction);
      },
      "params"_a, "k"_a, "resolution"_a = 40);

  m.def(
      "run_replicates",
      [](const GameParams& p, const LinkBreakMatrix& k, const std::string& mode,
         const std::array<double, 3>& initial, long steps, int replicates, std::uint64_t seed,
         long sample_interval, double burn_in_fraction, int imitations_per_round,
         bool freeze_strategies, int threads) {
        SimConfig cfg;
        cfg.params = p;
        cfg.k = k;
        if (mode == "uss")
          cfg.mode = Mode::USS;
        else if (mode == "ss")
          cfg.mode = Mode::SS;
        else
          throw ConfigError("mode must be \"uss\" or \"ss\"");
        cfg.initial = dist_from_tuple(initial);
        cfg.steps = steps;
        cfg.replicates = replicates;
        cfg.seed = seed;
        cfg.sample_interval = sample_interval;
        cfg.burn_in_fraction = burn_in_fraction;
        cfg.imitations_per_round = imitations_per_round;
        cfg.freeze_strategies = freeze_strategies;
        cfg.threads = threads;
        return record_to_dict(run_replicates(cfg));
      },
      "params"_a, "k"_a, "mode"_a, "initial"_a, "steps"_a, "replicates"_a = 1, "seed"_a = 1,
      "sample_interval"_a = 100, "burn_in_fraction"_a = 0.1, "imitations_per_round"_a = 0,
      "freeze_strategies"_a = false, "threads"_a = 1);

  m.def("full_cooperation_baseline", [](const GameParams& p) {
    const CooperationBaseline b = full_cooperation_baseline(p);
    return py::make_tuple(b.payoff, b.throughput);
  });

#ifdef FWDGAME_VERSION
  m.attr("__version__") = FWDGAME_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
