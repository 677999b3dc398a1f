#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fwdgame/abm.hpp"
#include "fwdgame/dynamics.hpp"
#include "fwdgame/params.hpp"

// Experiment orchestration: a strict JSON config format (unknown keys are
// errors), sweep expansion, and the CSV/JSON output writers. Every output
// file embeds the fully resolved config and seed so a run can be reproduced
// from the file alone.

namespace fwdgame {

struct ExperimentConfig {
  std::string scenario = "default";
  GameParams params;
  LinkBreakMatrix k;
  Mode mode = Mode::USS;
  StrategyDistribution initial{1.0 / 3, 1.0 / 3, 1.0 / 3};
  long steps = 10000;
  int replicates = 1;
  std::uint64_t seed = 1;
  long sample_interval = 100;
  double burn_in_fraction = 0.1;
  int imitations_per_round = 0;
  bool freeze_strategies = false;
  int threads = 1;
  int resolution = 40;
  IntegrateOptions integrate;
  std::vector<StrategyDistribution> trajectories;  // extra phase-portrait starts
  std::vector<double> sweep_p_e;
  std::vector<double> sweep_mu;
  std::string out_dir = ".";

  void validate() const;
  SimConfig sim_config() const;
  std::string to_json() const;  // resolved single-line form for file headers

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);
};

// One (p_e, mu) combination of the configured sweep; base config when both
// axes are empty.
struct SweepPoint {
  double p_e;
  double mu;
  std::string label;
};

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg);

// ---- output writers -------------------------------------------------------

std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& schema,
            const ExperimentConfig& cfg, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& values);
  ~CsvWriter();

 private:
  std::string buffer_;
  std::filesystem::path path_;
  std::size_t n_columns_;
};

void write_trajectory_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                          const Trajectory& traj);
void write_basin_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                     const BasinMap& map);
void write_timeseries_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                          const SimRecord& record);
std::string timeseries_csv_text(const ExperimentConfig& cfg, const SimRecord& record);
void write_threshold_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                          const ThresholdReport& uss, const ThresholdReport& ss);

struct ValidationCheck {
  std::string name;
  bool pass;
  double measured;
  double bound;
};

void write_validation_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                           const std::vector<ValidationCheck>& checks);

}  // namespace fwdgame
