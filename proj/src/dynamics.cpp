#include "fwdgame/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fwdgame {

namespace {

StrategyDistribution as_dist(const std::array<double, 3>& x) {
  return StrategyDistribution{x[0], x[1], x[2]};
}

bool finite(const std::array<double, 3>& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

}  // namespace

std::array<double, 3> replicator_rhs_uss(const std::array<double, 3>& x, const GameParams& p) {
  const StrategyDistribution d = as_dist(x);
  const ReputationState rep = stable_reputation(p.mu, d);
  const std::array<double, 3> pay = expected_payoffs_uss(p, d, rep);
  const double avg = x[0] * pay[0] + x[1] * pay[1] + x[2] * pay[2];
  return {p.beta * x[0] * (pay[0] - avg), p.beta * x[1] * (pay[1] - avg),
          p.beta * x[2] * (pay[2] - avg)};
}

int LinkTypeDistribution::pair_index(int a, int b) {
  if (a > b) std::swap(a, b);
  // (0,0)->0 (0,1)->1 (0,2)->2 (1,1)->3 (1,2)->4 (2,2)->5
  static constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return table[a][b];
}

std::pair<int, int> LinkTypeDistribution::pair_of(int index) {
  static constexpr std::pair<int, int> table[6] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
  return table[index];
}

std::string LinkTypeDistribution::pair_name(int index) {
  auto [a, b] = pair_of(index);
  return std::string(to_string(static_cast<Strategy>(a))) + "-" +
         std::string(to_string(static_cast<Strategy>(b)));
}

std::array<double, 6> LinkTypeDistribution::expected_counts(long links) const {
  std::array<double, 6> out{};
  for (int i = 0; i < 6; ++i) out[i] = static_cast<double>(links) * pi[i];
  return out;
}

LinkTypeDistribution stationary_link_distribution(const StrategyDistribution& x,
                                                  const LinkBreakMatrix& k) {
  x.require_on_simplex();
  k.validate();
  const std::array<double, 3> xs = x.to_array();
  LinkTypeDistribution out;
  double total = 0.0;
  for (int i = 0; i < 6; ++i) {
    auto [a, b] = LinkTypeDistribution::pair_of(i);
    const double multiplicity = (a == b) ? 1.0 : 2.0;  // 2 - delta_ab
    out.pi[i] = multiplicity * xs[a] * xs[b] / k(a, b);
    total += out.pi[i];
  }
  if (!(total > 0.0))
    throw NumericError("stationary link distribution undefined: no strategy mass present");
  out.normalization = 1.0 / total;
  for (double& v : out.pi) v *= out.normalization;
  return out;
}

Mat3 link_weighted_payoff_matrix(const GameParams& p, const ReputationState& rep,
                                 const LinkBreakMatrix& k) {
  Mat3 m = strategy_payoff_matrix(p, rep);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m[a][b] /= k(a, b);
  return m;
}

namespace {

// a(x) for possibly off-simplex x (used by finite differences at vertices).
double link_normalization(const std::array<double, 3>& x, const LinkBreakMatrix& k) {
  double total = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) total += x[a] * x[b] / k(a, b);
  return 1.0 / total;
}

}  // namespace

std::array<double, 3> fitness_ss(const StrategyDistribution& x, const GameParams& p,
                                 const ReputationState& rep, const LinkBreakMatrix& k) {
  const Mat3 m = link_weighted_payoff_matrix(p, rep, k);
  const std::array<double, 3> xs = x.to_array();
  const double a = link_normalization(xs, k);
  std::array<double, 3> f{};
  for (int i = 0; i < 3; ++i) {
    double mx = 0.0;
    for (int j = 0; j < 3; ++j) mx += m[i][j] * xs[j];
    f[i] = p.L * a * mx;
  }
  return f;
}

std::array<double, 3> replicator_rhs_ss(const std::array<double, 3>& x, const GameParams& p,
                                        const LinkBreakMatrix& k) {
  const ReputationState rep = stable_reputation(p.mu, as_dist(x));
  const Mat3 m = link_weighted_payoff_matrix(p, rep, k);
  const double a = link_normalization(x, k);
  std::array<double, 3> mx{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) mx[i] += m[i][j] * x[j];
  const double quad = x[0] * mx[0] + x[1] * mx[1] + x[2] * mx[2];
  const double rate = 0.5 * p.beta * p.L * a;
  return {rate * x[0] * (mx[0] - quad), rate * x[1] * (mx[1] - quad),
          rate * x[2] * (mx[2] - quad)};
}

namespace {

std::optional<Terminal> classify(const std::array<double, 3>& x, double tol) {
  for (int v = 0; v < 3; ++v) {
    double dist = 0.0;
    for (int m = 0; m < 3; ++m) dist += std::abs(x[m] - (m == v ? 1.0 : 0.0));
    if (dist < tol) return static_cast<Terminal>(v);
  }
  return std::nullopt;
}

void clip_renormalize(std::array<double, 3>& x) {
  double sum = 0.0;
  for (double& v : x) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  for (double& v : x) v /= sum;
}

}  // namespace

Trajectory integrate(const Flow& rhs, const StrategyDistribution& x0,
                     const IntegrateOptions& opts) {
  x0.require_on_simplex();
  Trajectory out;
  std::array<double, 3> x = x0.to_array();
  double t = 0.0;
  out.samples.push_back({t, as_dist(x)});

  if (auto term = classify(x, opts.vertex_tol)) {
    out.terminal = *term;
    out.t_end = 0.0;
    return out;
  }

  const double dt = opts.dt;
  long step = 0;
  while (t < opts.t_max) {
    const auto k1 = rhs(x);
    std::array<double, 3> tmp;
    for (int m = 0; m < 3; ++m) tmp[m] = x[m] + 0.5 * dt * k1[m];
    const auto k2 = rhs(tmp);
    for (int m = 0; m < 3; ++m) tmp[m] = x[m] + 0.5 * dt * k2[m];
    const auto k3 = rhs(tmp);
    for (int m = 0; m < 3; ++m) tmp[m] = x[m] + dt * k3[m];
    const auto k4 = rhs(tmp);
    for (int m = 0; m < 3; ++m)
      x[m] += dt / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
    if (!finite(x)) throw NumericError("integration produced a non-finite state");
    clip_renormalize(x);
    t += dt;
    ++step;

    if (step % opts.sample_stride == 0) out.samples.push_back({t, as_dist(x)});
    if (auto term = classify(x, opts.vertex_tol)) {
      if (step % opts.sample_stride != 0) out.samples.push_back({t, as_dist(x)});
      out.terminal = *term;
      out.t_end = t;
      return out;
    }
  }
  if (out.samples.back().t != t) out.samples.push_back({t, as_dist(x)});
  out.terminal = Terminal::None;
  out.t_end = t;
  return out;
}

namespace {

std::pair<std::complex<double>, std::complex<double>> eigen2x2(
    const std::array<std::array<double, 2>, 2>& j) {
  const double tr = j[0][0] + j[1][1];
  const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
  std::complex<double> l1 = tr / 2.0 + disc;
  std::complex<double> l2 = tr / 2.0 - disc;
  if (l1.real() < l2.real()) std::swap(l1, l2);
  return {l1, l2};
}

}  // namespace

VertexStabilityReport vertex_stability(const Flow& rhs, double beta, double fd_step) {
  VertexStabilityReport report;
  // chart coordinates (x1,x2); x3 = 1 - x1 - x2
  const std::array<std::array<double, 2>, 3> charts = {{{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}}};
  for (int v = 0; v < 3; ++v) {
    VertexReport& entry = report.vertices[v];
    entry.vertex = static_cast<Strategy>(v);
    auto eval = [&](double u1, double u2) {
      const std::array<double, 3> x = {u1, u2, 1.0 - u1 - u2};
      const auto f = rhs(x);
      return std::array<double, 2>{f[0], f[1]};
    };
    const double h = fd_step;
    const double norm = beta > 0.0 ? 0.5 * beta : 1.0;
    for (int col = 0; col < 2; ++col) {
      const double du1 = col == 0 ? h : 0.0;
      const double du2 = col == 1 ? h : 0.0;
      const auto fp = eval(charts[v][0] + du1, charts[v][1] + du2);
      const auto fm = eval(charts[v][0] - du1, charts[v][1] - du2);
      entry.jacobian[0][col] = (fp[0] - fm[0]) / (2.0 * h) / norm;
      entry.jacobian[1][col] = (fp[1] - fm[1]) / (2.0 * h) / norm;
    }
    auto [l1, l2] = eigen2x2(entry.jacobian);
    entry.lambda1 = l1;
    entry.lambda2 = l2;
    entry.stable = l1.real() < 0.0 && l2.real() < 0.0;
  }
  return report;
}

const ThresholdCondition* ThresholdReport::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return &c;
  return nullptr;
}

ThresholdReport uss_cess_thresholds(const GameParams& p) {
  p.validate();
  ThresholdReport rep;
  rep.scenario = "USS";
  rep.benefit_cost_ratio = p.b / p.c;
  rep.discrimination = p.discrimination();

  const double q = rep.discrimination;
  const double denom = q * (1.0 - p.p_e);
  ThresholdCondition fd;
  fd.name = "fd_ratio";
  fd.lhs = rep.benefit_cost_ratio;
  fd.rhs = denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
  fd.satisfied = fd.lhs > fd.rhs;
  rep.conditions.push_back(fd);

  // In a well-mixed population a resident FF is always invadable by DD: the
  // defector keeps the full provider gain and pays nothing as a relay.
  ThresholdCondition ff;
  ff.name = "ff_raw_vs_dd";
  ff.lhs = p.delivery_gain() - p.c;
  ff.rhs = p.delivery_gain();
  ff.satisfied = ff.lhs > ff.rhs;
  rep.conditions.push_back(ff);

  rep.fd_cess = fd.satisfied;
  rep.ff_cess = false;
  return rep;
}

ThresholdReport ss_cess_thresholds(const GameParams& p, const LinkBreakMatrix& k) {
  p.validate(true);
  k.validate();
  ThresholdReport rep;
  rep.scenario = "SS";
  rep.benefit_cost_ratio = p.b / p.c;
  rep.discrimination = p.discrimination();

  const double pe1 = 1.0 - p.p_e;
  const double k11 = k(0, 0), k12 = k(0, 1), k13 = k(0, 2), k22 = k(1, 1), k23 = k(1, 2);

  // raw column comparisons of the link-weighted matrix, reputations at the
  // candidate resident vertex
  const ReputationState rep_ff = stable_reputation(p.mu, StrategyDistribution::vertex(Strategy::FF));
  const ReputationState rep_fd = stable_reputation(p.mu, StrategyDistribution::vertex(Strategy::FD));
  const Mat3 m_ff = link_weighted_payoff_matrix(p, rep_ff, k);
  const Mat3 m_fd = link_weighted_payoff_matrix(p, rep_fd, k);

  auto raw = [&](const char* name, double lhs, double rhs) {
    ThresholdCondition c;
    c.name = name;
    c.lhs = lhs;
    c.rhs = rhs;
    c.satisfied = lhs > rhs;
    rep.conditions.push_back(c);
    return c.satisfied;
  };
  const bool ff_raw = raw("ff_raw_vs_fd", m_ff[0][0], m_ff[1][0]) &
                      raw("ff_raw_vs_dd", m_ff[0][0], m_ff[2][0]);
  const bool fd_raw = raw("fd_raw_vs_ff", m_fd[1][1], m_fd[0][1]) &
                      raw("fd_raw_vs_dd", m_fd[1][1], m_fd[2][1]);

  auto ratio = [&](const char* name, double lhs, double num, double den, bool upper_bound) {
    ThresholdCondition c;
    c.name = name;
    c.lhs = lhs;
    if (den > 0.0) {
      c.rhs = num / den;
      c.satisfied = upper_bound ? lhs < c.rhs : lhs > c.rhs;
    } else {
      c.rhs = std::numeric_limits<double>::quiet_NaN();
      c.degenerate = true;
      c.satisfied = false;
    }
    rep.conditions.push_back(c);
    return c;
  };
  const double bc = rep.benefit_cost_ratio;
  const auto ff1 = ratio("ff_ratio_vs_fd", bc, k12 - k11 * (1.0 - p.mu), (k12 - k11) * pe1, false);
  const auto ff2 = ratio("ff_ratio_vs_dd", bc, k13, (k12 - k11) * pe1, false);
  const auto fd_lo = ratio("fd_ratio_lower", bc, k23, (k23 - k22) * pe1, false);
  const auto fd_hi = ratio("fd_ratio_upper", bc, k22 - k12 * (1.0 - p.mu),
                           (k22 - k12) * (1.0 - p.mu) * pe1, true);

  rep.ff_cess = ff_raw;
  rep.fd_cess = fd_raw;
  const bool ff_ratio_usable = !ff1.degenerate && !ff2.degenerate;
  const bool fd_ratio_usable = !fd_lo.degenerate && !fd_hi.degenerate;
  rep.ratio_raw_agree = true;
  if (ff_ratio_usable && (ff1.satisfied && ff2.satisfied) != ff_raw) rep.ratio_raw_agree = false;
  if (fd_ratio_usable && (fd_lo.satisfied && fd_hi.satisfied) != fd_raw) rep.ratio_raw_agree = false;
  return rep;
}

BasinMap compute_basins(const Flow& rhs, int resolution, const IntegrateOptions& opts) {
  if (resolution < 10) throw ConfigError("basin resolution must be at least 10");
  BasinMap map;
  map.resolution = resolution;
  std::array<long, 3> counts{};
  long unclassified = 0;
  long interior_total = 0;
  for (int i = 0; i <= resolution; ++i) {
    for (int j = 0; j <= resolution - i; ++j) {
      const double x1 = static_cast<double>(i) / resolution;
      const double x2 = static_cast<double>(j) / resolution;
      const double x3 = 1.0 - x1 - x2;
      const StrategyDistribution x0{x1, x2, x3};
      const Trajectory traj = integrate(rhs, x0, opts);
      map.points.push_back({x1, x2, traj.terminal, traj.t_end});
      const bool is_vertex = (i == resolution) || (j == resolution) || (i == 0 && j == 0);
      if (is_vertex) continue;  // equilibria by construction, no basin information
      ++interior_total;
      if (traj.terminal == Terminal::None)
        ++unclassified;
      else
        ++counts[static_cast<int>(traj.terminal)];
    }
  }
  for (int v = 0; v < 3; ++v)
    map.area_fraction[v] = static_cast<double>(counts[v]) / static_cast<double>(interior_total);
  map.unclassified_fraction = static_cast<double>(unclassified) / static_cast<double>(interior_total);
  return map;
}

}  // namespace fwdgame
