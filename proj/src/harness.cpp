// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#include "dbs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dbs/parallel.hpp"
#include "dbs/stats.hpp"

namespace dbs {

namespace {

constexpr std::uint64_t kChannelSalt = 0x10000;
constexpr std::uint64_t kNoiseSalt = 0xFEED;
constexpr std::uint64_t kAlgoSaltBase = 0x20000;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  std::string lower = v;
  std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
  if (lower == "inf" || lower == "+inf") return std::numeric_limits<double>::infinity();
  if (lower == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for '" + key + "': " + value);
  }
  if (pos != v.size())
    throw std::invalid_argument("config: bad numeric value for '" + key + "': " + value);
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  const double d = parse_double(key, value);
  const auto i = static_cast<long long>(d);
  if (static_cast<double>(i) != d)
    throw std::invalid_argument("config: expected an integer for '" + key + "': " + value);
  return i;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: expected a boolean for '" + key + "': " + value);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for '" + key + "'");
  return out;
}

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double db_of_amplitude_ratio(double num, double den) { return 20.0 * std::log10(num / den); }

}  // namespace

PowerDelayProfile SimulationParams::profile() const {
  if (pdp_delays_ns.empty()) return epa_profile();
  return make_profile(pdp_delays_ns, pdp_powers_db);
}

std::string pdp_to_config(const PowerDelayProfile& pdp) {
  std::string delays = "pdp_delays_ns = ";
  std::string powers = "pdp_powers_db = ";
  for (std::size_t p = 0; p < pdp.taps.size(); ++p) {
    if (p > 0) {
      delays += ",";
      powers += ",";
    }
    delays += fmt_double(pdp.taps[p].delay_s * 1e9);
    powers += fmt_double(pdp.taps[p].relative_power_db);
  }
  return delays + "\n" + powers + "\n";
}

SimulationParams resolve_params(const std::map<std::string, std::string>& overrides,
                                std::set<std::string>* explicit_keys) {
  SimulationParams p;
  for (const auto& [key, value] : overrides) {
    if (explicit_keys != nullptr) explicit_keys->insert(key);
    if (key == "n_nodes") {
      p.n_nodes = parse_int(key, value);
      if (p.n_nodes < 1) throw std::invalid_argument("config: n_nodes must be >= 1");
    } else if (key == "snr_db") {
      p.snr_db = parse_double(key, value);
    } else if (key == "epsilon") {
      p.epsilon = parse_double(key, value);
      if (!(p.epsilon > 0.0 && p.epsilon < 1.0))
        throw std::invalid_argument("config: epsilon must be in (0, 1)");
    } else if (key == "iterations") {
      p.iterations = parse_int(key, value);
      if (p.iterations < 0) throw std::invalid_argument("config: iterations must be >= 0");
    } else if (key == "feedback_bits") {
      p.feedback_bits = static_cast<int>(parse_int(key, value));
      if (p.feedback_bits < 0 || p.feedback_bits % 2 != 0)
        throw std::invalid_argument("config: feedback_bits must be even and >= 0");
    } else if (key == "clip_multiplier") {
      p.clip_multiplier = parse_double(key, value);
      if (!(p.clip_multiplier > 0.0))
        throw std::invalid_argument("config: clip_multiplier must be positive");
    } else if (key == "training_length") {
      p.training_length = parse_int(key, value);
      if (p.training_length < 0)
        throw std::invalid_argument("config: training_length must be >= 0");
    } else if (key == "obf_perturb_deg") {
      p.obf.perturb_deg = parse_double(key, value);
      if (!(p.obf.perturb_deg > 0.0))
        throw std::invalid_argument("config: obf_perturb_deg must be positive");
    } else if (key == "obf_window") {
      p.obf.window = static_cast<int>(parse_int(key, value));
      if (p.obf.window < 0) throw std::invalid_argument("config: obf_window must be >= 0");
    } else if (key == "r2bf_beta1") {
      p.r2bf.beta1 = parse_double(key, value);
    } else if (key == "r2bf_beta2") {
      p.r2bf.beta2 = parse_double(key, value);
    } else if (key == "r2bf_beta3") {
      p.r2bf.beta3 = parse_double(key, value);
    } else if (key == "r2bf_xi1") {
      p.r2bf.xi1 = parse_double(key, value);
    } else if (key == "r2bf_xi2") {
      p.r2bf.xi2 = parse_double(key, value);
    } else if (key == "r2bf_initial_perturb_deg") {
      p.r2bf.initial_perturb_deg = parse_double(key, value);
    } else if (key == "r2bf_window") {
      p.r2bf.window = static_cast<int>(parse_int(key, value));
      if (p.r2bf.window < 0) throw std::invalid_argument("config: r2bf_window must be >= 0");
    } else if (key == "m2bf_alpha1") {
      p.m2bf.alpha1 = parse_double(key, value);
    } else if (key == "m2bf_alpha2") {
      p.m2bf.alpha2 = parse_double(key, value);
    } else if (key == "m2bf_start_deg") {
      p.m2bf.initial_range_deg = parse_double(key, value);
    } else if (key == "m2bf_decay") {
      p.m2bf.range_decay = parse_double(key, value);
      if (!(p.m2bf.range_decay > 0.0 && p.m2bf.range_decay <= 1.0))
        throw std::invalid_argument("config: m2bf_decay must be in (0, 1]");
    } else if (key == "m2bf_floor_deg") {
      p.m2bf.range_floor_deg = parse_double(key, value);
    } else if (key == "m2bf_window") {
      p.m2bf.window = static_cast<int>(parse_int(key, value));
      if (p.m2bf.window < 0) throw std::invalid_argument("config: m2bf_window must be >= 0");
    } else if (key == "bandwidth_hz") {
      p.ofdm.bandwidth_hz = parse_double(key, value);
    } else if (key == "n_subcarriers") {
      p.ofdm.n_subcarriers = parse_int(key, value);
    } else if (key == "n_pilot_subcarriers") {
      p.ofdm.n_pilot_subcarriers = parse_int(key, value);
    } else if (key == "fft_size") {
      p.ofdm.fft_size = parse_int(key, value);
    } else if (key == "subcarrier_spacing_hz") {
      p.ofdm.subcarrier_spacing_hz = parse_double(key, value);
    } else if (key == "subframe_s") {
      p.ofdm.subframe_s = parse_double(key, value);
    } else if (key == "symbols_per_subframe") {
      p.ofdm.symbols_per_subframe = static_cast<int>(parse_int(key, value));
    } else if (key == "grid2d_pilot_symbols") {
      p.ofdm.grid2d_pilot_symbols_per_subframe = static_cast<int>(parse_int(key, value));
    } else if (key == "doppler_hz") {
      p.ofdm.doppler_spread_hz = parse_double(key, value);
    } else if (key == "uplink_bandwidth_hz") {
      p.uplink_bandwidth_hz = parse_double(key, value);
      if (!(p.uplink_bandwidth_hz > 0.0))
        throw std::invalid_argument("config: uplink_bandwidth_hz must be positive");
    } else if (key == "uplink_subcarriers") {
      p.uplink_subcarriers = parse_int(key, value);
      if (p.uplink_subcarriers < 1)
        throw std::invalid_argument("config: uplink_subcarriers must be >= 1");
    } else if (key == "uplink_subcarrier_spacing_hz") {
      p.uplink_subcarrier_spacing_hz = parse_double(key, value);
      if (!(p.uplink_subcarrier_spacing_hz > 0.0))
        throw std::invalid_argument("config: uplink_subcarrier_spacing_hz must be positive");
    } else if (key == "tx_power_dbm") {
      p.budget.tx_power_per_node_dbm = parse_double(key, value);
    } else if (key == "carrier_hz") {
      p.budget.carrier_hz = parse_double(key, value);
      if (!(p.budget.carrier_hz > 0.0))
        throw std::invalid_argument("config: carrier_hz must be positive");
    } else if (key == "tx_height_m") {
      p.budget.tx_height_m = parse_double(key, value);
    } else if (key == "rx_height_m") {
      p.budget.rx_height_m = parse_double(key, value);
    } else if (key == "noise_figure_db") {
      p.budget.noise_figure_db = parse_double(key, value);
    } else if (key == "margin_db") {
      p.budget.implementation_margin_db = parse_double(key, value);
    } else if (key == "budget_bandwidth_hz") {
      p.budget.bandwidth_hz = parse_double(key, value);
      if (!(p.budget.bandwidth_hz > 0.0))
        throw std::invalid_argument("config: budget_bandwidth_hz must be positive");
    } else if (key == "target_snr_db") {
      p.target_snr_db = parse_double(key, value);
    } else if (key == "pdp_delays_ns") {
      p.pdp_delays_ns = parse_double_list(key, value);
    } else if (key == "pdp_powers_db") {
      p.pdp_powers_db = parse_double_list(key, value);
    } else if (key == "snr_list") {
      p.snr_list = parse_double_list(key, value);
    } else if (key == "n_nodes_list") {
      p.n_nodes_list.clear();
      for (double v : parse_double_list(key, value)) {
        const auto n = static_cast<Eigen::Index>(v);
        if (static_cast<double>(n) != v || n < 1)
          throw std::invalid_argument("config: n_nodes_list entries must be integers >= 1");
        p.n_nodes_list.push_back(n);
      }
    } else if (key == "bits_list") {
      p.bits_list.clear();
      for (double v : parse_double_list(key, value)) {
        const auto b = static_cast<int>(v);
        if (static_cast<double>(b) != v || b < 0 || b % 2 != 0)
          throw std::invalid_argument("config: bits_list entries must be even integers >= 0");
        p.bits_list.push_back(b);
      }
    } else if (key == "n_nodes_max") {
      p.n_nodes_max = parse_int(key, value);
      if (p.n_nodes_max < 1) throw std::invalid_argument("config: n_nodes_max must be >= 1");
    } else if (key == "per_subcarrier") {
      p.per_subcarrier = parse_bool(key, value);
    } else if (key == "emit") {
      p.emit = trim(value);
      if (p.emit != "mean" && p.emit != "trace")
        throw std::invalid_argument("config: emit must be 'mean' or 'trace'");
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (p.pdp_delays_ns.size() != p.pdp_powers_db.size())
    throw std::invalid_argument("config: pdp_delays_ns and pdp_powers_db must be set together");
  p.ofdm.validate();
  return p;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");

    if (key == "experiment") {
      cfg.experiment = value;
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "trials") {
      const auto t = parse_int(key, value);
      if (t < 1) throw std::invalid_argument("config: trials must be >= 1");
      cfg.trials = t;
    } else if (key == "out") {
      cfg.output_path = value;
    } else if (key == "format") {
      std::string v = value;
      std::transform(v.begin(), v.end(), v.begin(), ::tolower);
      if (v == "csv")
        cfg.format = ExperimentConfig::Format::Csv;
      else if (v == "json")
        cfg.format = ExperimentConfig::Format::Json;
      else
        throw std::invalid_argument("config: format must be csv or json");
      cfg.format_set = true;
    } else if (key == "threads") {
      const auto t = parse_int(key, value);
      if (t < 0) throw std::invalid_argument("config: threads must be >= 0");
      cfg.threads = static_cast<unsigned>(t);
    } else {
      cfg.overrides[key] = value;
    }
  }
  resolve_params(cfg.overrides);  // validate overrides eagerly
  return cfg;
}

namespace {

struct Ctx {
  const ExperimentConfig& cfg;
  SimulationParams p;
  std::set<std::string> keys;
  Eigen::Index trials = 0;
  Rng root;

  [[nodiscard]] bool was_set(const std::string& key) const { return keys.count(key) > 0; }
  [[nodiscard]] Eigen::Index default_n(Eigen::Index fallback) const {
    return was_set("n_nodes") ? p.n_nodes : fallback;
  }
};

ResultRecord make_record(const Ctx& ctx,
                         std::vector<std::pair<std::string, std::string>> parameters,
                         std::vector<std::pair<std::string, double>> metrics) {
  ResultRecord r;
  r.experiment = ctx.cfg.experiment;
  r.seed = ctx.cfg.seed;
  r.parameters = std::move(parameters);
  r.metrics = std::move(metrics);
  return r;
}

struct AlgorithmEntry {
  Algorithm algorithm;
  const char* name;
};

constexpr AlgorithmEntry kEvolutionAlgorithms[] = {
    {Algorithm::Dost, "dost"},
    {Algorithm::Sddb, "sddb"},
    {Algorithm::R2bf, "r2bf"},
    {Algorithm::M2bf, "m2bf"},
};

AdaptationConfig adaptation_config(const SimulationParams& p, Algorithm alg, int bits) {
  AdaptationConfig cfg;
  cfg.algorithm = alg;
  cfg.feedback_bits = (alg == Algorithm::Dost || alg == Algorithm::Sddb) ? bits : 0;
  cfg.clip_multiplier = p.clip_multiplier;
  cfg.training_length = p.training_length;
  cfg.obf = p.obf;
  cfg.r2bf = p.r2bf;
  cfg.m2bf = p.m2bf;
  return cfg;
}

/// Shared by fig2 (noiseless) and fig3 (-5 dB per node).
std::vector<ResultRecord> run_evolution(Ctx& ctx, bool noiseless) {
  const Eigen::Index n = ctx.default_n(100);
  const Eigen::Index iters = ctx.p.iterations;
  const double snr = (noiseless && !ctx.was_set("snr_db"))
                         ? std::numeric_limits<double>::infinity()
                         : ctx.p.snr_db;
  const auto n_algs = static_cast<std::size_t>(std::size(kEvolutionAlgorithms));

  std::vector<std::vector<Eigen::VectorXd>> traces(n_algs);
  for (auto& v : traces) v.resize(static_cast<std::size_t>(ctx.trials));
  std::vector<double> ideal(static_cast<std::size_t>(ctx.trials));
  std::vector<double> ideal_rss_values(static_cast<std::size_t>(ctx.trials));

  parallel_trials(ctx.trials, ctx.cfg.threads, [&](std::int64_t t) {
    Rng trial = ctx.root.fork(static_cast<std::uint64_t>(t));
    Rng ch = trial.fork(kChannelSalt);
    Eigen::VectorXcd gains(n);
    for (Eigen::Index i = 0; i < n; ++i) gains[i] = ch.cgaussian();
    ideal[static_cast<std::size_t>(t)] = beamforming_gain_db(gains.cwiseAbs().sum());
    ideal_rss_values[static_cast<std::size_t>(t)] = ideal_rss(gains);
    for (std::size_t a = 0; a < n_algs; ++a) {
      const AdaptationConfig acfg =
          adaptation_config(ctx.p, kEvolutionAlgorithms[a].algorithm, ctx.p.feedback_bits);
      traces[a][static_cast<std::size_t>(t)] =
          run_adaptation(acfg, gains, snr, iters, trial.fork(kAlgoSaltBase + a)).rss;
    }
  });

  std::vector<ResultRecord> records;
  const bool trace_mode = ctx.p.emit == "trace";
  std::vector<double> column(static_cast<std::size_t>(ctx.trials));
  for (std::size_t a = 0; a < n_algs; ++a) {
    const std::string name = kEvolutionAlgorithms[a].name;
    if (trace_mode) {
      for (Eigen::Index t = 0; t < ctx.trials; ++t) {
        const Eigen::VectorXd& rss = traces[a][static_cast<std::size_t>(t)];
        for (Eigen::Index i = 0; i <= iters; ++i)
          records.push_back(make_record(
              ctx,
              {{"algorithm", name}, {"trial", std::to_string(t)}, {"iteration", std::to_string(i)}},
              {{"rss", rss[i]},
               {"gain_db", beamforming_gain_db(static_cast<double>(n) * rss[i])}}));
      }
      continue;
    }
    for (Eigen::Index i = 0; i <= iters; ++i) {
      for (Eigen::Index t = 0; t < ctx.trials; ++t)
        column[static_cast<std::size_t>(t)] = traces[a][static_cast<std::size_t>(t)][i];
      const double mean_rss = pairwise_mean(column);
      for (Eigen::Index t = 0; t < ctx.trials; ++t)
        column[static_cast<std::size_t>(t)] =
            beamforming_gain_db(static_cast<double>(n) * column[static_cast<std::size_t>(t)]);
      records.push_back(make_record(
          ctx, {{"algorithm", name}, {"iteration", std::to_string(i)}},
          {{"mean_rss", mean_rss}, {"mean_gain_db", pairwise_mean(column)}}));
    }
  }
  if (!trace_mode)
    records.push_back(make_record(
        ctx, {{"algorithm", "ideal"}, {"iteration", std::to_string(iters)}},
        {{"mean_rss", pairwise_mean(ideal_rss_values)}, {"mean_gain_db", pairwise_mean(ideal)}}));
  return records;
}

std::vector<ResultRecord> run_fig2(Ctx& ctx) { return run_evolution(ctx, true); }
std::vector<ResultRecord> run_fig3(Ctx& ctx) { return run_evolution(ctx, false); }

std::vector<ResultRecord> run_fig4(Ctx& ctx) {
  const Eigen::Index n = ctx.default_n(100);
  const Eigen::Index iters = ctx.p.training_length > 0 ? ctx.p.training_length : n;
  const std::vector<int> bits = ctx.p.bits_list.empty() ? std::vector<int>{2, 4, 6} : ctx.p.bits_list;
  const std::vector<double> snrs =
      ctx.p.snr_list.empty() ? std::vector<double>{-10.0, -5.0, 0.0, 5.0} : ctx.p.snr_list;
  constexpr AlgorithmEntry kAlgs[] = {{Algorithm::Dost, "dost"}, {Algorithm::Sddb, "sddb"}};

  std::vector<ResultRecord> records;
  std::vector<double> final_gain(static_cast<std::size_t>(ctx.trials));
  std::vector<double> ideal(static_cast<std::size_t>(ctx.trials));
  for (std::size_t a = 0; a < std::size(kAlgs); ++a) {
    for (int b : bits) {
      for (double snr : snrs) {
        parallel_trials(ctx.trials, ctx.cfg.threads, [&](std::int64_t t) {
          Rng trial = ctx.root.fork(static_cast<std::uint64_t>(t));
          Rng ch = trial.fork(kChannelSalt);
          Eigen::VectorXcd gains(n);
          for (Eigen::Index i = 0; i < n; ++i) gains[i] = ch.cgaussian();
          ideal[static_cast<std::size_t>(t)] = beamforming_gain_db(gains.cwiseAbs().sum());
          const AdaptationConfig acfg = adaptation_config(ctx.p, kAlgs[a].algorithm, b);
          final_gain[static_cast<std::size_t>(t)] =
              run_adaptation(acfg, gains, snr, iters, trial.fork(kAlgoSaltBase + a))
                  .converged_gain_db;
        });
        const double mean_gain = pairwise_mean(final_gain);
        const double mean_ideal = pairwise_mean(ideal);
        records.push_back(make_record(ctx,
                                      {{"algorithm", kAlgs[a].name},
                                       {"feedback_bits", std::to_string(b)},
                                       {"snr_db", fmt_double(snr)}},
                                      {{"mean_gain_db", mean_gain},
                                       {"ideal_gain_db", mean_ideal},
                                       {"gap_db", mean_ideal - mean_gain}}));
      }
    }
  }
  return records;
}

PilotGrid full_pilot_grid(Eigen::Index n_subcarriers) {
  PilotGrid grid;
  grid.arrangement = PilotArrangement::Comb;
  grid.indices.resize(n_subcarriers);
  for (Eigen::Index k = 0; k < n_subcarriers; ++k) grid.indices[k] = static_cast<int>(k);
  return grid;
}

std::vector<ResultRecord> run_fig6(Ctx& ctx) {
  const Eigen::Index n = ctx.p.n_nodes;
  const Eigen::Index training = ctx.p.training_length > 0 ? ctx.p.training_length : n;
  const PowerDelayProfile pdp = ctx.p.profile();
  const PilotGrid comb = comb_grid(ctx.p.ofdm);
  const PilotGrid full = full_pilot_grid(ctx.p.ofdm.n_subcarriers);
  const std::vector<double> snrs = ctx.p.per_subcarrier ? std::vector<double>{ctx.p.snr_db}
                                   : ctx.p.snr_list.empty()
                                       ? std::vector<double>{-10.0, -5.0, 0.0, 5.0, 10.0}
                                       : ctx.p.snr_list;
  const auto n_snr = snrs.size();
  const auto n_trials = static_cast<std::size_t>(ctx.trials);
  const Eigen::Index k_sc = ctx.p.ofdm.n_subcarriers;

  std::vector<double> ideal_avg(n_trials);
  std::vector<std::vector<double>> comb_avg(n_snr, std::vector<double>(n_trials));
  std::vector<std::vector<double>> full_avg(n_snr, std::vector<double>(n_trials));
  std::vector<Eigen::VectorXd> ideal_sc;
  std::vector<Eigen::VectorXd> dost_sc;
  if (ctx.p.per_subcarrier) {
    ideal_sc.resize(n_trials);
    dost_sc.resize(n_trials);
  }

  parallel_trials(ctx.trials, ctx.cfg.threads, [&](std::int64_t t) {
    Rng trial = ctx.root.fork(static_cast<std::uint64_t>(t));
    std::vector<NodeChannel> channels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      Rng ch_rng = trial.fork(kChannelSalt + static_cast<std::uint64_t>(i));
      channels[static_cast<std::size_t>(i)] = sample_node_channel(pdp, ch_rng);
    }
    const Eigen::MatrixXcd h = node_frequency_matrix(channels, ctx.p.ofdm);
    const WidebandRss ideal = ideal_wideband_rss(h);
    ideal_avg[static_cast<std::size_t>(t)] = ideal.average;
    for (std::size_t s = 0; s < n_snr; ++s) {
      std::optional<QuantizerSpec> q;
      const double noise_var = std::pow(10.0, -snrs[s] / 10.0);
      if (ctx.p.feedback_bits > 0)
        q = QuantizerSpec::for_training(ctx.p.feedback_bits, static_cast<double>(n), noise_var,
                                        ctx.p.clip_multiplier);
      const Rng noise = trial.fork(kNoiseSalt + s);
      const WidebandEstimate est_comb = wideband_dost(h, comb, training, snrs[s], q, noise);
      const WidebandRss rss_comb = wideband_rss(est_comb, h);
      comb_avg[s][static_cast<std::size_t>(t)] = rss_comb.average;
      const WidebandEstimate est_full = wideband_dost(h, full, training, snrs[s], q, noise);
      full_avg[s][static_cast<std::size_t>(t)] = wideband_rss(est_full, h).average;
      if (ctx.p.per_subcarrier) {
        ideal_sc[static_cast<std::size_t>(t)] = ideal.per_subcarrier;
        dost_sc[static_cast<std::size_t>(t)] = rss_comb.per_subcarrier;
      }
    }
  });

  std::vector<ResultRecord> records;
  if (ctx.p.per_subcarrier) {
    std::vector<double> column(n_trials);
    std::set<int> pilot_set(comb.indices.begin(), comb.indices.end());
    for (Eigen::Index k = 0; k < k_sc; ++k) {
      for (std::size_t t = 0; t < n_trials; ++t) column[t] = ideal_sc[t][k];
      const double ideal_mean = pairwise_mean(column);
      for (std::size_t t = 0; t < n_trials; ++t) column[t] = dost_sc[t][k];
      records.push_back(make_record(
          ctx,
          {{"subcarrier", std::to_string(k)},
           {"interpolated_flag", pilot_set.count(static_cast<int>(k)) ? "0" : "1"}},
          {{"ideal_rss", ideal_mean}, {"dost_rss", pairwise_mean(column)}}));
    }
    return records;
  }

  const double ideal_mean = pairwise_mean(ideal_avg);
  for (std::size_t s = 0; s < n_snr; ++s) {
    const double comb_mean = pairwise_mean(comb_avg[s]);
    const double full_mean = pairwise_mean(full_avg[s]);
    records.push_back(make_record(
        ctx, {{"snr_db", fmt_double(snrs[s])}},
        {{"ideal_rss", ideal_mean},
         {"dost_comb_rss", comb_mean},
         {"dost_full_rss", full_mean},
         {"gap_to_ideal_db", db_of_amplitude_ratio(ideal_mean, comb_mean)},
         {"comb_penalty_db", db_of_amplitude_ratio(full_mean, comb_mean)}}));
  }
  return records;
}

std::vector<ResultRecord> run_fig7(Ctx& ctx) {
  std::vector<ResultRecord> records;
  for (Eigen::Index n = 1; n <= ctx.p.n_nodes_max; ++n) {
    OutageSpec spec;
    spec.epsilon = ctx.p.epsilon;
    spec.snr_per_node_db = ctx.p.snr_db;
    spec.n_nodes = n;
    spec.n_trials = ctx.trials;
    const Rng rng = ctx.root.fork(static_cast<std::uint64_t>(n));
    records.push_back(make_record(ctx, {{"n_nodes", std::to_string(n)}},
                                  {{"ergodic", ergodic_capacity_mc(spec, rng)},
                                   {"outage_mc", narrowband_outage_capacity_mc(spec, rng)},
                                   {"outage_gaussian", gaussian_outage_capacity(spec)},
                                   {"outage_saa", saa_outage_capacity(spec)}}));
  }
  return records;
}

std::vector<ResultRecord> run_fig8(Ctx& ctx) {
  const std::vector<Eigen::Index> nodes =
      ctx.p.n_nodes_list.empty() ? std::vector<Eigen::Index>{1, 2, 4, 6, 8, 10}
                                 : ctx.p.n_nodes_list;
  WidebandDostOptions dost;
  dost.feedback_bits = ctx.p.feedback_bits;
  dost.clip_multiplier = ctx.p.clip_multiplier;
  dost.training_length = ctx.p.training_length;

  std::vector<ResultRecord> records;
  for (Eigen::Index n : nodes) {
    OutageSpec spec;
    spec.epsilon = ctx.p.epsilon;
    spec.snr_per_node_db = ctx.p.snr_db;
    spec.n_nodes = n;
    spec.n_trials = ctx.trials;
    const Rng rng = ctx.root.fork(static_cast<std::uint64_t>(n));
    const double ideal = wideband_outage_capacity(spec, ctx.p.ofdm, WidebandCsi::IdealCsi, rng,
                                                  dost, ctx.cfg.threads);
    const double trained = wideband_outage_capacity(spec, ctx.p.ofdm, WidebandCsi::Dost, rng,
                                                    dost, ctx.cfg.threads);
    records.push_back(make_record(ctx, {{"n_nodes", std::to_string(n)}},
                                  {{"ideal_csi", ideal}, {"dost", trained}}));
  }
  return records;
}

UplinkSpec uplink_spec(const Ctx& ctx, double snr_db, UplinkStrategy strategy) {
  UplinkSpec spec;
  spec.feedback_bandwidth_hz = ctx.p.uplink_bandwidth_hz;
  spec.n_uplink_subcarriers = ctx.p.uplink_subcarriers;
  spec.strategy = strategy;
  spec.snr_per_node_db = snr_db;
  spec.n_nodes = ctx.p.n_nodes;
  spec.n_trials = ctx.trials;
  spec.subcarrier_spacing_hz = ctx.p.uplink_subcarrier_spacing_hz;
  spec.pdp = ctx.p.profile();
  return spec;
}

std::vector<ResultRecord> run_fig9(Ctx& ctx) {
  const std::vector<double> snrs =
      ctx.p.snr_list.empty() ? std::vector<double>{-10.0, -7.5, -5.0, -2.5, 0.0, 2.5, 5.0}
                             : ctx.p.snr_list;
  std::vector<ResultRecord> records;
  for (std::size_t s = 0; s < snrs.size(); ++s) {
    const Rng rng = ctx.root.fork(s);
    const double r1 = uplink_outage_rate(uplink_spec(ctx, snrs[s], UplinkStrategy::SingleNode),
                                         ctx.p.epsilon, rng, ctx.cfg.threads);
    const double r2 = uplink_outage_rate(uplink_spec(ctx, snrs[s], UplinkStrategy::BestNode),
                                         ctx.p.epsilon, rng, ctx.cfg.threads);
    const double r3 =
        uplink_outage_rate(uplink_spec(ctx, snrs[s], UplinkStrategy::ReceiveBeamforming),
                           ctx.p.epsilon, rng, ctx.cfg.threads);
    records.push_back(make_record(
        ctx, {{"snr_db", fmt_double(snrs[s])}},
        {{"r_single", r1}, {"r_best", r2}, {"r_beam", r3}}));
  }
  return records;
}

std::vector<ResultRecord> run_frame_timing(Ctx& ctx) {
  constexpr std::pair<UplinkStrategy, const char*> kStrategies[] = {
      {UplinkStrategy::SingleNode, "single_node"},
      {UplinkStrategy::BestNode, "best_node"},
      {UplinkStrategy::ReceiveBeamforming, "receive_beamforming"},
  };
  std::vector<ResultRecord> records;
  const Rng rng = ctx.root.fork(1);
  for (const auto& [strategy, name] : kStrategies) {
    const double rate =
        uplink_outage_rate(uplink_spec(ctx, ctx.p.snr_db, strategy), ctx.p.epsilon, rng,
                           ctx.cfg.threads);
    const double feedback_rate_bps = rate * ctx.p.uplink_bandwidth_hz;
    const FrameTiming ft = frame_timing(ctx.p.n_nodes, ctx.p.ofdm.n_pilot_subcarriers,
                                        feedback_rate_bps, ctx.p.ofdm.ofdm_symbol_s());
    records.push_back(make_record(ctx, {{"strategy", name}},
                                  {{"outage_rate_bps_hz", rate},
                                   {"feedback_rate_bps", feedback_rate_bps},
                                   {"frame_length_ms", ft.frame_length_s * 1e3},
                                   {"coherence_time_ms", ft.coherence_time_s * 1e3}}));
  }
  return records;
}

std::vector<ResultRecord> run_link_budget(Ctx& ctx) {
  constexpr std::pair<GainMode, const char*> kModes[] = {
      {GainMode::Single, "single"},
      {GainMode::PowerPooling, "power_pooling"},
      {GainMode::Beamforming, "beamforming"},
  };
  const std::vector<double> carriers = ctx.was_set("carrier_hz")
                                           ? std::vector<double>{ctx.p.budget.carrier_hz}
                                           : std::vector<double>{200e6, 800e6};
  std::vector<ResultRecord> records;
  for (double carrier : carriers) {
    LinkBudget budget = ctx.p.budget;
    budget.carrier_hz = carrier;
    for (const auto& [mode, name] : kModes) {
      const double range =
          hata_range_km(budget, ctx.p.target_snr_db, mode, ctx.p.n_nodes);
      records.push_back(make_record(ctx,
                                    {{"carrier_mhz", fmt_double(carrier / 1e6)},
                                     {"gain_mode", name}},
                                    {{"range_km", range},
                                     {"path_loss_at_range_db", hata_path_loss_db(budget, range)},
                                     {"target_snr_db", ctx.p.target_snr_db}}));
    }
  }
  return records;
}

struct ExperimentEntry {
  ExperimentInfo info;
  std::vector<ResultRecord> (*fn)(Ctx&);
};

const std::vector<ExperimentEntry>& experiment_table() {
  static const std::vector<ExperimentEntry> table = {
      {{"fig2-noiseless-evolution",
        "per-iteration mean beamforming gain, noiseless, 2-bit feedback, N=100", 2000},
       run_fig2},
      {{"fig3-noisy-evolution",
        "per-iteration mean beamforming gain at -5 dB per-node SNR, N=100", 2000},
       run_fig3},
      {{"fig4-quantization-sweep",
        "final DOST/SDDB gain vs feedback bits and per-node SNR after one training batch", 2000},
       run_fig4},
      {{"fig6-wideband-rss",
        "subcarrier-averaged RSS for ideal/DOST over the OFDM plan (set per_subcarrier=true "
        "for the per-subcarrier breakdown)",
        200},
       run_fig6},
      {{"fig7-narrowband-outage",
        "ergodic and 1% outage spectral efficiency vs node count, narrowband", 200000},
       run_fig7},
      {{"fig8-wideband-outage", "1% outage spectral efficiency vs node count, wideband OFDM",
        10000},
       run_fig8},
      {{"fig9-uplink-outage", "uplink outage rates for single/best/beamforming reception",
        50000},
       run_fig9},
      {{"tab-frame-timing", "feedback-limited frame lengths and coherence times per strategy",
        100000},
       run_frame_timing},
      {{"tab-link-budget", "attainable ranges under the open-area Hata model", 1}, run_link_budget},
  };
  return table;
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = [] {
    std::vector<ExperimentInfo> out;
    for (const auto& e : experiment_table()) out.push_back(e.info);
    return out;
  }();
  return catalog;
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg) {
  const ExperimentEntry* entry = nullptr;
  for (const auto& e : experiment_table())
    if (e.info.name == cfg.experiment) entry = &e;
  if (entry == nullptr)
    throw std::invalid_argument("run_experiment: unknown experiment '" + cfg.experiment + "'");
  if (cfg.trials < 0) throw std::invalid_argument("run_experiment: trials must be >= 1");

  Ctx ctx{cfg, {}, {}, 0, Rng(cfg.seed)};
  ctx.p = resolve_params(cfg.overrides, &ctx.keys);
  ctx.trials = cfg.trials > 0 ? cfg.trials : entry->info.default_trials;
  return entry->fn(ctx);
}

void write_csv(std::ostream& os, const std::vector<ResultRecord>& records) {
  if (records.empty()) return;
  os << "experiment,seed";
  for (const auto& [k, v] : records.front().parameters) os << ',' << k;
  for (const auto& [k, v] : records.front().metrics) os << ',' << k;
  os << '\n';
  for (const auto& r : records) {
    os << r.experiment << ',' << r.seed;
    for (const auto& [k, v] : r.parameters) os << ',' << v;
    for (const auto& [k, v] : r.metrics) os << ',' << fmt_double(v);
    os << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<ResultRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj["experiment"] = r.experiment;
    obj["seed"] = r.seed;
    nlohmann::ordered_json params;
    for (const auto& [k, v] : r.parameters) params[k] = v;
    obj["parameters"] = params;
    nlohmann::ordered_json metrics;
    for (const auto& [k, v] : r.metrics) metrics[k] = v;
    obj["metrics"] = metrics;
    arr.push_back(obj);
  }
  os << arr.dump(2) << '\n';
}

std::string format_records(const ExperimentConfig& cfg, const std::vector<ResultRecord>& records) {
  ExperimentConfig::Format format = cfg.format;
  if (!cfg.format_set && cfg.experiment == "tab-link-budget")
    format = ExperimentConfig::Format::Json;
  std::ostringstream os;
  if (format == ExperimentConfig::Format::Csv)
    write_csv(os, records);
  else
    write_json(os, records);
  return os.str();
}

}  // namespace dbs
