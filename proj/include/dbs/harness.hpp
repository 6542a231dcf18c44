// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dbs/beamforming.hpp"
#include "dbs/capacity.hpp"
#include "dbs/ofdm.hpp"

namespace dbs {

/// Every tunable the experiments read, resolved from the flat key=value
/// overrides on top of the Table I/II and algorithm defaults.
struct SimulationParams {
  Eigen::Index n_nodes = 10;
  double snr_db = -5.0;
  double epsilon = 0.01;
  Eigen::Index iterations = 500;
  int feedback_bits = 2;
  double clip_multiplier = 1.0;
  Eigen::Index training_length = 0;  // 0 means n_nodes

  ObfConfig obf;
  R2bfConfig r2bf;
  M2bfConfig m2bf;
  OfdmConfig ofdm;

  double uplink_bandwidth_hz = 2e6;
  Eigen::Index uplink_subcarriers = 120;
  double uplink_subcarrier_spacing_hz = 150e3;

  LinkBudget budget;
  double target_snr_db = 4.0;

  std::vector<double> pdp_delays_ns;  // empty = EPA
  std::vector<double> pdp_powers_db;

  // Sweep controls used by individual experiments.
  std::vector<double> snr_list;
  std::vector<Eigen::Index> n_nodes_list;
  std::vector<int> bits_list;
  Eigen::Index n_nodes_max = 20;
  bool per_subcarrier = false;
  std::string emit = "mean";  // "mean" or "trace"

  [[nodiscard]] PowerDelayProfile profile() const;
};

/// Validates and applies overrides; throws on unknown keys or out-of-range
/// values. `explicit_keys`, when given, receives the keys that were set.
SimulationParams resolve_params(const std::map<std::string, std::string>& overrides,
                                std::set<std::string>* explicit_keys = nullptr);

/// Renders a profile as the pdp_delays_ns / pdp_powers_db config lines that
/// parse_config and resolve_params accept back.
std::string pdp_to_config(const PowerDelayProfile& pdp);

struct ExperimentConfig {
  enum class Format { Csv, Json };

  std::string experiment;
  std::uint64_t seed = 1;
  Eigen::Index trials = 0;  // 0 means the experiment default
  std::map<std::string, std::string> overrides;
  std::string output_path;  // empty means stdout
  Format format = Format::Csv;
  bool format_set = false;
  unsigned threads = 1;
};

struct ResultRecord {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::pair<std::string, double>> metrics;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
  Eigen::Index default_trials;
};

const std::vector<ExperimentInfo>& experiment_catalog();

/// Parses the flat key=value config text ('#' starts a comment). Reserved
/// keys (experiment, seed, trials, out, format, threads) populate the
/// ExperimentConfig; everything else is validated as a parameter override.
ExperimentConfig parse_config(const std::string& text);

/// Dispatches to the named experiment. Deterministic for a fixed (seed,
/// config) regardless of the thread count.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg);

void write_csv(std::ostream& os, const std::vector<ResultRecord>& records);
void write_json(std::ostream& os, const std::vector<ResultRecord>& records);
std::string format_records(const ExperimentConfig& cfg, const std::vector<ResultRecord>& records);

}  // namespace dbs
