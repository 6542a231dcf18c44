// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dbs/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dbs_sim - distributed transmit beamforming link-level experiments"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "print the experiment catalog");

  auto* run_cmd = app.add_subcommand("run", "run a named experiment");
  std::string experiment;
  std::string config_path;
  std::string out_path;
  std::string format;
  std::uint64_t seed = 0;
  long long trials = 0;
  int threads = -1;
  std::vector<std::string> sets;
  run_cmd->add_option("experiment", experiment, "experiment name (see 'list')");
  run_cmd->add_option("--config", config_path, "flat key=value config file");
  run_cmd->add_option("--seed", seed, "global seed");
  run_cmd->add_option("--trials", trials, "Monte Carlo trials (0 = experiment default)");
  run_cmd->add_option("--out", out_path, "output path (default stdout)");
  run_cmd->add_option("--format", format, "csv or json");
  run_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  run_cmd->add_option("--set", sets, "parameter override key=value (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const auto& info : dbs::experiment_catalog())
        std::cout << info.name << "\t(default trials " << info.default_trials << ")\t"
                  << info.description << "\n";
      return 0;
    }

    dbs::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = dbs::parse_config(read_file(config_path));
    if (!experiment.empty()) cfg.experiment = experiment;
    if (run_cmd->count("--seed") > 0) cfg.seed = seed;
    if (run_cmd->count("--trials") > 0) {
      if (trials < 1) throw std::invalid_argument("trials must be >= 1");
      cfg.trials = trials;
    }
    if (!out_path.empty()) cfg.output_path = out_path;
    if (run_cmd->count("--threads") > 0) cfg.threads = static_cast<unsigned>(threads);
    if (!format.empty()) {
      if (format == "csv")
        cfg.format = dbs::ExperimentConfig::Format::Csv;
      else if (format == "json")
        cfg.format = dbs::ExperimentConfig::Format::Json;
      else
        throw std::invalid_argument("format must be csv or json");
      cfg.format_set = true;
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      cfg.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    dbs::resolve_params(cfg.overrides);  // fail fast on bad overrides
    if (cfg.experiment.empty()) throw std::invalid_argument("no experiment named; try 'list'");

    const auto records = dbs::run_experiment(cfg);
    const std::string text = dbs::format_records(cfg, records);
    if (cfg.output_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(cfg.output_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write output file: " + cfg.output_path);
      out << text;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
