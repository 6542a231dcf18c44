// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#include "dbs/capacity.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dbs/parallel.hpp"
#include "dbs/stats.hpp"

namespace dbs {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2 = 0.69314718055994530942;
constexpr double kUplinkBandwidthHz = 20e6;
constexpr std::uint64_t kChannelSalt = 0x10000;
constexpr std::uint64_t kNoiseSalt = 0xFEED;

double snr_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

/// One draw of sum_i |H_i| for i.i.d. CN(0,1) channels.
double rayleigh_sum(Eigen::Index n, Rng& rng) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += std::abs(rng.cgaussian());
  return s;
}

/// P(Poisson(u) >= n) = 1 - e^{-u} sum_{k<n} u^k / k!, the small-argument CDF
/// of the Rayleigh sum at u = t^2 / (2b).
double poisson_tail(Eigen::Index n, double u) {
  if (u <= 0.0) return 0.0;
  double cdf = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    cdf += std::exp(-u + static_cast<double>(k) * std::log(u) -
                    std::lgamma(static_cast<double>(k) + 1.0));
  return 1.0 - std::min(cdf, 1.0);
}

}  // namespace

void OutageSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("OutageSpec: epsilon must be in (0, 1)");
  if (n_nodes < 1) throw std::invalid_argument("OutageSpec: n_nodes must be positive");
  if (static_cast<double>(n_trials) < 10.0 / epsilon)
    throw std::invalid_argument("OutageSpec: too few trials for the requested epsilon");
}

double narrowband_outage_capacity_mc(const OutageSpec& spec, Rng rng) {
  spec.validate();
  std::vector<double> sums(static_cast<std::size_t>(spec.n_trials));
  for (Eigen::Index t = 0; t < spec.n_trials; ++t) {
    Rng trial = rng.fork(static_cast<std::uint64_t>(t));
    sums[static_cast<std::size_t>(t)] = rayleigh_sum(spec.n_nodes, trial);
  }
  const double q = empirical_quantile(sums, spec.epsilon);
  return std::log2(1.0 + snr_linear(spec.snr_per_node_db) * q * q);
}

double gaussian_outage_capacity(const OutageSpec& spec) {
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
    throw std::invalid_argument("gaussian_outage_capacity: epsilon must be in (0, 1)");
  const double n = static_cast<double>(spec.n_nodes);
  const double mean = n * std::sqrt(kPi / 4.0);
  const double sd = std::sqrt(n * (1.0 - kPi / 4.0));
  const double q = std::max(0.0, mean - sd * inverse_q(spec.epsilon));
  return std::log2(1.0 + snr_linear(spec.snr_per_node_db) * q * q);
}

double saa_outage_capacity(const OutageSpec& spec) {
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
    throw std::invalid_argument("saa_outage_capacity: epsilon must be in (0, 1)");
  const Eigen::Index n = spec.n_nodes;
  // b = (sigma^2 / N) * [prod_{i=1}^{N} (2i-1)]^{1/N} with sigma^2 = 1/2 so
  // that each variate has E[|H|^2] = 1.
  double log_double_factorial = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i)
    log_double_factorial += std::log(2.0 * static_cast<double>(i) - 1.0);
  const double b = std::exp(log_double_factorial / static_cast<double>(n)) /
                   (2.0 * static_cast<double>(n));

  const auto cdf_of_t = [&](double t) { return poisson_tail(n, t * t / (2.0 * b)); };
  double hi = 1.0;
  int doublings = 0;
  while (cdf_of_t(hi) < spec.epsilon) {
    hi *= 2.0;
    if (++doublings > 64)
      throw std::runtime_error("saa_outage_capacity: bisection bracket did not converge");
  }
  double lo = 0.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (cdf_of_t(mid) < spec.epsilon ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  const double quantile = t * std::sqrt(static_cast<double>(n));
  return std::log2(1.0 + snr_linear(spec.snr_per_node_db) * quantile * quantile);
}

double ergodic_capacity_mc(const OutageSpec& spec, Rng rng) {
  spec.validate();
  const double snr = snr_linear(spec.snr_per_node_db);
  std::vector<double> rates(static_cast<std::size_t>(spec.n_trials));
  for (Eigen::Index t = 0; t < spec.n_trials; ++t) {
    Rng trial = rng.fork(static_cast<std::uint64_t>(t));
    const double s = rayleigh_sum(spec.n_nodes, trial);
    rates[static_cast<std::size_t>(t)] = std::log2(1.0 + snr * s * s);
  }
  return pairwise_mean(rates);
}

double wideband_outage_capacity(const OutageSpec& spec, const OfdmConfig& cfg, WidebandCsi mode,
                                Rng rng, const WidebandDostOptions& dost, unsigned threads) {
  spec.validate();
  cfg.validate();
  const double snr = snr_linear(spec.snr_per_node_db);
  const PowerDelayProfile pdp = epa_profile();
  const PilotGrid grid = comb_grid(cfg);
  const Eigen::Index training_length =
      dost.training_length > 0 ? dost.training_length : spec.n_nodes;
  std::optional<QuantizerSpec> q;
  if (mode == WidebandCsi::Dost && dost.feedback_bits > 0)
    q = QuantizerSpec::for_training(dost.feedback_bits, static_cast<double>(spec.n_nodes),
                                    1.0 / snr, dost.clip_multiplier);

  std::vector<double> rates(static_cast<std::size_t>(spec.n_trials));
  parallel_trials(spec.n_trials, threads, [&](std::int64_t t) {
    Rng trial = rng.fork(static_cast<std::uint64_t>(t));
    std::vector<NodeChannel> channels(static_cast<std::size_t>(spec.n_nodes));
    for (Eigen::Index i = 0; i < spec.n_nodes; ++i) {
      Rng ch_rng = trial.fork(kChannelSalt + static_cast<std::uint64_t>(i));
      channels[static_cast<std::size_t>(i)] = sample_node_channel(pdp, ch_rng);
    }
    const Eigen::MatrixXcd h = node_frequency_matrix(channels, cfg);

    Eigen::VectorXd amplitude;
    if (mode == WidebandCsi::IdealCsi) {
      amplitude = h.cwiseAbs().colwise().sum().transpose();
    } else {
      const WidebandEstimate est = wideband_dost(h, grid, training_length,
                                                 spec.snr_per_node_db, q, trial.fork(kNoiseSalt));
      amplitude = wideband_rss(est, h).per_subcarrier * static_cast<double>(spec.n_nodes);
    }
    double acc = 0.0;
    for (Eigen::Index k = 0; k < amplitude.size(); ++k)
      acc += std::log1p(snr * amplitude[k] * amplitude[k]);
    rates[static_cast<std::size_t>(t)] = acc / (kLog2 * static_cast<double>(amplitude.size()));
  });
  return empirical_quantile(rates, spec.epsilon);
}

double uplink_outage_rate(const UplinkSpec& spec, double epsilon, Rng rng, unsigned threads) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("uplink_outage_rate: epsilon must be in (0, 1)");
  if (spec.n_nodes < 1 || spec.n_uplink_subcarriers < 1)
    throw std::invalid_argument("uplink_outage_rate: invalid node/subcarrier counts");
  if (spec.feedback_bandwidth_hz > kUplinkBandwidthHz)
    throw std::invalid_argument("uplink_outage_rate: feedback band exceeds the uplink band");
  if (static_cast<double>(spec.n_uplink_subcarriers) * spec.subcarrier_spacing_hz >
      kUplinkBandwidthHz)
    throw std::invalid_argument("uplink_outage_rate: subcarrier comb exceeds the uplink band");
  if (static_cast<double>(spec.n_trials) < 10.0 / epsilon)
    throw std::invalid_argument("uplink_outage_rate: too few trials for the requested epsilon");

  const double snr = snr_linear(spec.snr_per_node_db);
  const Eigen::Index m = spec.n_uplink_subcarriers;
  const double f0 = -static_cast<double>(m - 1) / 2.0 * spec.subcarrier_spacing_hz;

  std::vector<double> metric(static_cast<std::size_t>(spec.n_trials));
  parallel_trials(spec.n_trials, threads, [&](std::int64_t t) {
    Rng trial = rng.fork(static_cast<std::uint64_t>(t));
    double single = 0.0;
    double best = 0.0;
    Eigen::VectorXd pooled_power = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < spec.n_nodes; ++k) {
      Rng ch_rng = trial.fork(kChannelSalt + static_cast<std::uint64_t>(k));
      const NodeChannel ch = sample_node_channel(spec.pdp, ch_rng);
      const Eigen::VectorXcd gains =
          frequency_response_grid(ch, f0, spec.subcarrier_spacing_hz, m);
      double rate = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double p = std::norm(gains[i]);
        rate += std::log1p(snr * p);
        pooled_power[i] += p;
      }
      rate /= kLog2 * static_cast<double>(m);
      if (k == 0) single = rate;
      best = std::max(best, rate);
      if (spec.strategy == UplinkStrategy::SingleNode && k == 0) break;
    }
    double value = 0.0;
    switch (spec.strategy) {
      case UplinkStrategy::SingleNode:
        value = single;
        break;
      case UplinkStrategy::BestNode:
        value = best;
        break;
      case UplinkStrategy::ReceiveBeamforming: {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) acc += std::log1p(snr * pooled_power[i]);
        value = acc / (kLog2 * static_cast<double>(m));
        break;
      }
    }
    metric[static_cast<std::size_t>(t)] = value;
  });
  return empirical_quantile(metric, epsilon);
}

FrameTiming frame_timing(Eigen::Index n_nodes, Eigen::Index n_pilot_subcarriers,
                         double feedback_rate_bps, double t_ofdm_s) {
  if (n_nodes < 0 || n_pilot_subcarriers < 0)
    throw std::invalid_argument("frame_timing: negative counts");
  if (!(feedback_rate_bps > 0.0))
    throw std::invalid_argument("frame_timing: feedback rate must be positive");
  FrameTiming ft;
  ft.n_nodes = n_nodes;
  ft.n_pilot_subcarriers = n_pilot_subcarriers;
  ft.feedback_rate_bps = feedback_rate_bps;
  const double feedback_limited = 2.0 * static_cast<double>(n_nodes) *
                                  static_cast<double>(n_pilot_subcarriers) / feedback_rate_bps;
  ft.frame_length_s = std::max(feedback_limited, static_cast<double>(n_nodes) * t_ofdm_s);
  ft.coherence_time_s = 3.0 * ft.frame_length_s;
  return ft;
}

double hata_path_loss_db(const LinkBudget& budget, double distance_km) {
  if (!(distance_km > 0.0)) throw std::invalid_argument("hata_path_loss_db: distance must be positive");
  if (budget.tx_height_m < 1.0 || budget.tx_height_m > 200.0 || budget.rx_height_m < 0.5 ||
      budget.rx_height_m > 10.0)
    throw std::invalid_argument("hata_path_loss_db: antenna heights outside model validity");
  const double f_mhz = budget.carrier_hz / 1e6;
  if (!(f_mhz > 0.0)) throw std::invalid_argument("hata_path_loss_db: invalid carrier");
  const double lf = std::log10(f_mhz);
  const double lhb = std::log10(budget.tx_height_m);
  const double a_hm = (1.1 * lf - 0.7) * budget.rx_height_m - (1.56 * lf - 0.8);
  const double urban = 69.55 + 26.16 * lf - 13.82 * lhb - a_hm +
                       (44.9 - 6.55 * lhb) * std::log10(distance_km);
  return urban - 4.78 * lf * lf + 18.33 * lf - 40.94;
}

double hata_range_km(const LinkBudget& budget, double required_snr_db, GainMode mode,
                     Eigen::Index n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("hata_range_km: n_nodes must be positive");
  double array_gain_db = 0.0;
  if (mode == GainMode::PowerPooling) array_gain_db = 10.0 * std::log10(static_cast<double>(n_nodes));
  if (mode == GainMode::Beamforming) array_gain_db = 20.0 * std::log10(static_cast<double>(n_nodes));

  const double noise_floor_dbm =
      -174.0 + 10.0 * std::log10(budget.bandwidth_hz) + budget.noise_figure_db;
  const auto rx_snr_db = [&](double d_km) {
    return budget.tx_power_per_node_dbm + array_gain_db - budget.implementation_margin_db -
           hata_path_loss_db(budget, d_km) - noise_floor_dbm;
  };

  double lo = 0.05;
  double hi = 50.0;
  if (rx_snr_db(lo) < required_snr_db)
    throw std::domain_error("hata_range_km: no feasible range at the minimum distance");
  if (rx_snr_db(hi) >= required_snr_db)
    throw std::domain_error("hata_range_km: range exceeds the model's validity span");
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (rx_snr_db(mid) >= required_snr_db ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dbs
