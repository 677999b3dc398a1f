#include "fwdgame/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

namespace fwdgame {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for \"") + key + "\"");
  }
}

template <class T>
T get_required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key))
    throw ConfigError("config: missing required key \"" + std::string(key) + "\" in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for \"") + key + "\"");
  }
}

StrategyDistribution dist_from_json(const json& arr, const char* key) {
  if (!arr.is_array() || arr.size() != 3)
    throw ConfigError(std::string("config: \"") + key + "\" must be an array [x1, x2, x3]");
  StrategyDistribution d{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
  d.require_on_simplex();
  return d;
}

}  // namespace

void ExperimentConfig::validate() const {
  params.validate(mode == Mode::SS);
  k.validate();
  initial.require_on_simplex();
  sim_config().validate();
  if (resolution < 10) throw ConfigError("config: resolution must be at least 10");
  if (!(integrate.dt > 0.0)) throw ConfigError("config: dt must be positive");
  if (!(integrate.t_max > 0.0)) throw ConfigError("config: t_max must be positive");
  if (!(integrate.vertex_tol > 0.0)) throw ConfigError("config: vertex_tol must be positive");
  for (const auto& x : trajectories) x.require_on_simplex();
  for (double v : sweep_p_e)
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("config: sweep p_e values must be in [0,1]");
  for (double v : sweep_mu)
    if (!(v >= 0.0 && v < 0.5)) throw ConfigError("config: sweep mu values must be in [0,0.5)");
}

SimConfig ExperimentConfig::sim_config() const {
  SimConfig sim;
  sim.params = params;
  sim.k = k;
  sim.mode = mode;
  sim.initial = initial;
  sim.steps = steps;
  sim.replicates = replicates;
  sim.seed = seed;
  sim.sample_interval = sample_interval;
  sim.burn_in_fraction = burn_in_fraction;
  sim.imitations_per_round = imitations_per_round;
  sim.freeze_strategies = freeze_strategies;
  sim.threads = threads;
  return sim;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  require_keys(root, "top level",
               {"scenario", "params", "k", "mode", "initial", "steps", "replicates", "seed",
                "sample_interval", "burn_in_fraction", "imitations_per_round",
                "freeze_strategies", "threads", "resolution", "dt", "t_max", "vertex_tol",
                "trajectories", "sweep", "out_dir"});

  ExperimentConfig cfg;
  cfg.scenario = get_or<std::string>(root, "scenario", "default");

  const json& p = root.contains("params") ? root.at("params") : json::object();
  require_keys(p, "params", {"b", "c", "p_e", "mu", "beta", "omega", "L", "N"});
  cfg.params.b = get_required<double>(p, "b", "params");
  cfg.params.c = get_required<double>(p, "c", "params");
  cfg.params.p_e = get_required<double>(p, "p_e", "params");
  cfg.params.mu = get_required<double>(p, "mu", "params");
  cfg.params.beta = get_or<double>(p, "beta", 10.0);
  cfg.params.omega = get_or<double>(p, "omega", 0.02);
  cfg.params.L = get_or<int>(p, "L", 4);
  cfg.params.N = get_or<int>(p, "N", 100);

  if (!root.contains("k")) throw ConfigError("config: missing required section \"k\"");
  const json& kk = root.at("k");
  require_keys(kk, "k", {"k11", "k12", "k13", "k22", "k23", "k33"});
  cfg.k = LinkBreakMatrix::from_upper(
      get_required<double>(kk, "k11", "k"), get_required<double>(kk, "k12", "k"),
      get_required<double>(kk, "k13", "k"), get_required<double>(kk, "k22", "k"),
      get_required<double>(kk, "k23", "k"), get_required<double>(kk, "k33", "k"));

  const std::string mode = get_or<std::string>(root, "mode", "uss");
  if (mode == "uss")
    cfg.mode = Mode::USS;
  else if (mode == "ss")
    cfg.mode = Mode::SS;
  else
    throw ConfigError("config: mode must be \"uss\" or \"ss\"");

  if (root.contains("initial")) cfg.initial = dist_from_json(root.at("initial"), "initial");
  cfg.steps = get_or<long>(root, "steps", cfg.steps);
  cfg.replicates = get_or<int>(root, "replicates", cfg.replicates);
  cfg.seed = get_or<std::uint64_t>(root, "seed", cfg.seed);
  cfg.sample_interval = get_or<long>(root, "sample_interval", cfg.sample_interval);
  cfg.burn_in_fraction = get_or<double>(root, "burn_in_fraction", cfg.burn_in_fraction);
  cfg.imitations_per_round = get_or<int>(root, "imitations_per_round", 0);
  cfg.freeze_strategies = get_or<bool>(root, "freeze_strategies", false);
  cfg.threads = get_or<int>(root, "threads", 1);
  cfg.resolution = get_or<int>(root, "resolution", 40);
  cfg.integrate.dt = get_or<double>(root, "dt", 0.01);
  cfg.integrate.t_max = get_or<double>(root, "t_max", 2000.0);
  cfg.integrate.vertex_tol = get_or<double>(root, "vertex_tol", 1e-3);
  cfg.out_dir = get_or<std::string>(root, "out_dir", ".");

  if (root.contains("trajectories")) {
    const json& arr = root.at("trajectories");
    if (!arr.is_array()) throw ConfigError("config: \"trajectories\" must be an array of points");
    for (const auto& item : arr) cfg.trajectories.push_back(dist_from_json(item, "trajectories"));
  }
  if (root.contains("sweep")) {
    const json& sw = root.at("sweep");
    require_keys(sw, "sweep", {"p_e", "mu"});
    if (sw.contains("p_e"))
      for (const auto& v : sw.at("p_e")) cfg.sweep_p_e.push_back(v.get<double>());
    if (sw.contains("mu"))
      for (const auto& v : sw.at("mu")) cfg.sweep_mu.push_back(v.get<double>());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string ExperimentConfig::to_json() const {
  json root;
  root["scenario"] = scenario;
  root["params"] = {{"b", params.b},       {"c", params.c},         {"p_e", params.p_e},
                    {"mu", params.mu},     {"beta", params.beta},   {"omega", params.omega},
                    {"L", params.L},       {"N", params.N}};
  root["k"] = {{"k11", k(0, 0)}, {"k12", k(0, 1)}, {"k13", k(0, 2)},
               {"k22", k(1, 1)}, {"k23", k(1, 2)}, {"k33", k(2, 2)}};
  root["mode"] = std::string(to_string(mode));
  root["initial"] = {initial.x1, initial.x2, initial.x3};
  root["steps"] = steps;
  root["replicates"] = replicates;
  root["seed"] = seed;
  root["sample_interval"] = sample_interval;
  root["burn_in_fraction"] = burn_in_fraction;
  root["imitations_per_round"] = imitations_per_round;
  root["freeze_strategies"] = freeze_strategies;
  root["threads"] = threads;
  root["resolution"] = resolution;
  root["dt"] = integrate.dt;
  root["t_max"] = integrate.t_max;
  root["vertex_tol"] = integrate.vertex_tol;
  if (!sweep_p_e.empty() || !sweep_mu.empty())
    root["sweep"] = {{"p_e", sweep_p_e}, {"mu", sweep_mu}};
  return root.dump();
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> points;
  const std::vector<double> pes = cfg.sweep_p_e.empty() ? std::vector<double>{cfg.params.p_e}
                                                        : cfg.sweep_p_e;
  const std::vector<double> mus = cfg.sweep_mu.empty() ? std::vector<double>{cfg.params.mu}
                                                       : cfg.sweep_mu;
  for (double pe : pes) {
    for (double mu : mus) {
      char label[64];
      std::snprintf(label, sizeof label, "pe%g_mu%g", pe, mu);
      points.push_back({pe, mu, label});
    }
  }
  return points;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& schema,
                     const ExperimentConfig& cfg, const std::vector<std::string>& columns)
    : path_(path), n_columns_(columns.size()) {
  buffer_ += "# schema: " + schema + "\n";
  buffer_ += "# config: " + cfg.to_json() + "\n";
  buffer_ += "# seed: " + std::to_string(cfg.seed) + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += format_double(values[i]);
  }
  buffer_ += '\n';
}

void CsvWriter::raw_row(const std::vector<std::string>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += values[i];
  }
  buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
  std::ofstream out(path_, std::ios::binary);
  out << buffer_;
}

void write_trajectory_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                          const Trajectory& traj) {
  CsvWriter w(path, "trajectory-v1", cfg, {"t", "x1", "x2", "x3"});
  for (const auto& s : traj.samples) w.row({s.t, s.x.x1, s.x.x2, s.x.x3});
}

void write_basin_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                     const BasinMap& map) {
  CsvWriter w(path, "basin-v1", cfg, {"x1_0", "x2_0", "terminal", "t_conv"});
  for (const auto& p : map.points)
    w.raw_row({format_double(p.x1_0), format_double(p.x2_0), std::string(to_string(p.terminal)),
               format_double(p.t_conv)});
}

std::string timeseries_csv_text(const ExperimentConfig& cfg, const SimRecord& record) {
  std::string text;
  text += "# schema: simulate-v1\n";
  text += "# config: " + cfg.to_json() + "\n";
  text += "# seed: " + std::to_string(cfg.seed) + "\n";
  const auto& cols = metric_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) text += ',';
    text += cols[i];
  }
  for (std::size_t i = 1; i < cols.size(); ++i) text += ",se_" + cols[i];
  text += '\n';
  for (std::size_t row = 0; row < record.mean_rows.size(); ++row) {
    for (std::size_t col = 0; col < cols.size(); ++col) {
      if (col) text += ',';
      text += format_double(metric_value(record.mean_rows[row], static_cast<int>(col)));
    }
    for (std::size_t col = 1; col < cols.size(); ++col)
      text += ',' + format_double(metric_value(record.se_rows[row], static_cast<int>(col)));
    text += '\n';
  }
  return text;
}

void write_timeseries_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                          const SimRecord& record) {
  std::ofstream out(path, std::ios::binary);
  out << timeseries_csv_text(cfg, record);
}

namespace {

json threshold_to_json(const ThresholdReport& rep) {
  json out;
  out["scenario"] = rep.scenario;
  out["benefit_cost_ratio"] = rep.benefit_cost_ratio;
  out["discrimination"] = rep.discrimination;
  out["ff_cess"] = rep.ff_cess;
  out["fd_cess"] = rep.fd_cess;
  out["ratio_raw_agree"] = rep.ratio_raw_agree;
  json conds = json::array();
  for (const auto& c : rep.conditions) {
    json jc;
    jc["name"] = c.name;
    jc["lhs"] = c.lhs;
    jc["rhs"] = std::isfinite(c.rhs) ? json(c.rhs) : json(nullptr);
    jc["satisfied"] = c.satisfied;
    jc["degenerate"] = c.degenerate;
    conds.push_back(jc);
  }
  out["conditions"] = conds;
  return out;
}

}  // namespace

void write_threshold_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                          const ThresholdReport& uss, const ThresholdReport& ss) {
  json root;
  root["schema"] = "thresholds-v1";
  root["config"] = json::parse(cfg.to_json());
  root["seed"] = cfg.seed;
  root["uss"] = threshold_to_json(uss);
  root["ss"] = threshold_to_json(ss);
  std::ofstream out(path, std::ios::binary);
  out << root.dump(2) << '\n';
}

void write_validation_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                           const std::vector<ValidationCheck>& checks) {
  json root;
  root["schema"] = "validate-v1";
  root["config"] = json::parse(cfg.to_json());
  root["seed"] = cfg.seed;
  bool all = true;
  json arr = json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"measured", c.measured},
                   {"bound", c.bound}});
  }
  root["checks"] = arr;
  root["all_pass"] = all;
  std::ofstream out(path, std::ios::binary);
  out << root.dump(2) << '\n';
}

}  // namespace fwdgame
