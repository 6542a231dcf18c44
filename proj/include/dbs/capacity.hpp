// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#pragma once

#include <Eigen/Dense>

#include "dbs/channel.hpp"
#include "dbs/ofdm.hpp"
#include "dbs/rng.hpp"

namespace dbs {

/// Parameters of an epsilon-outage analysis at a fixed per-node SNR.
struct OutageSpec {
  double epsilon = 0.01;
  double snr_per_node_db = -5.0;
  Eigen::Index n_nodes = 10;
  Eigen::Index n_trials = 100000;

  void validate() const;
};

enum class UplinkStrategy { SingleNode, BestNode, ReceiveBeamforming };

/// Feedback-link analysis. The M_u feedback subcarriers occupy a
/// feedback_bandwidth_hz worth of spectrum but are interleaved across the
/// whole uplink band (every 10th subcarrier for the defaults), so the
/// feedback link sees the full frequency diversity of the channel.
struct UplinkSpec {
  double feedback_bandwidth_hz = 2e6;
  Eigen::Index n_uplink_subcarriers = 120;
  UplinkStrategy strategy = UplinkStrategy::SingleNode;
  double snr_per_node_db = -5.0;
  Eigen::Index n_nodes = 10;
  Eigen::Index n_trials = 100000;
  double subcarrier_spacing_hz = 150e3;  // spacing of the interleaved comb
  PowerDelayProfile pdp = epa_profile();
};

/// Frame and coherence-time bookkeeping for the feedback-limited protocol.
struct FrameTiming {
  Eigen::Index n_nodes = 0;
  Eigen::Index n_pilot_subcarriers = 0;
  double feedback_rate_bps = 0.0;
  double frame_length_s = 0.0;
  double coherence_time_s = 0.0;
};

struct LinkBudget {
  double tx_power_per_node_dbm = 20.0;
  double carrier_hz = 800e6;
  double tx_height_m = 30.0;
  double rx_height_m = 1.5;
  double noise_figure_db = 6.0;
  double implementation_margin_db = 5.0;
  double bandwidth_hz = 20e6;
};

enum class GainMode { Single, PowerPooling, Beamforming };

/// Monte Carlo epsilon-outage spectral efficiency of the ideally beamformed
/// narrowband link: C = log2(1 + SNR * q_eps^2) with q_eps the empirical
/// eps-quantile of sum_i |H_i|, H_i ~ CN(0,1) i.i.d.
double narrowband_outage_capacity_mc(const OutageSpec& spec, Rng rng);

/// Central-limit approximation: the Rayleigh sum is treated as Gaussian with
/// mean N sqrt(pi/4) and variance N (1 - pi/4).
double gaussian_outage_capacity(const OutageSpec& spec);

/// Small-argument approximation to the CDF of a sum of i.i.d. Rayleigh
/// variables (per-variate E[|H|^2] = 1), inverted by bisection.
double saa_outage_capacity(const OutageSpec& spec);

/// Mean over trials of log2(1 + SNR * (sum_i |H_i|)^2).
double ergodic_capacity_mc(const OutageSpec& spec, Rng rng);

enum class WidebandCsi { IdealCsi, Dost };

struct WidebandDostOptions {
  int feedback_bits = 2;
  double clip_multiplier = 1.0;
  Eigen::Index training_length = 0;  // 0 means n_nodes
};

/// Epsilon-outage of the subcarrier-averaged spectral efficiency over EPA
/// channels, with perfect per-subcarrier phase alignment or quantized-feedback
/// DOST training on the comb. Trials run on `threads` workers with per-trial
/// derived seeds; the result does not depend on the worker count.
double wideband_outage_capacity(const OutageSpec& spec, const OfdmConfig& cfg, WidebandCsi mode,
                                Rng rng, const WidebandDostOptions& dost = {},
                                unsigned threads = 1);

/// Epsilon-outage spectral efficiency of the feedback link for the selected
/// reception strategy.
double uplink_outage_rate(const UplinkSpec& spec, double epsilon, Rng rng, unsigned threads = 1);

/// T_f = max(2 N M_p / R_f, N * t_ofdm), T_c = 3 T_f. Accepts an infinite
/// feedback rate (training time becomes the limit).
FrameTiming frame_timing(Eigen::Index n_nodes, Eigen::Index n_pilot_subcarriers,
                         double feedback_rate_bps, double t_ofdm_s);

/// Open (rural) area Hata path loss in dB at distance d (km). Below 150 MHz
/// the formula is extrapolated unchanged.
double hata_path_loss_db(const LinkBudget& budget, double distance_km);

/// Largest distance at which the received SNR, including the power-pooling
/// (10 log10 N) or beamforming (20 log10 N) gain and less the implementation
/// margin, still meets required_snr_db. Monotone bisection on the path loss.
double hata_range_km(const LinkBudget& budget, double required_snr_db, GainMode mode,
                     Eigen::Index n_nodes);

}  // namespace dbs
