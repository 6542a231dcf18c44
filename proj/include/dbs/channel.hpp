// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dbs/rng.hpp"

namespace dbs {

enum class Fading { Rayleigh };

/// One tap of a tapped-delay-line profile.
struct PathTap {
  double delay_s = 0.0;
  double relative_power_db = 0.0;
  Fading fading = Fading::Rayleigh;
};

/// Tapped-delay-line power delay profile with unit total power:
/// amplitudes[p] is the square root of tap p's power share, sum of squares 1.
struct PowerDelayProfile {
  std::vector<PathTap> taps;
  Eigen::VectorXd amplitudes;

  [[nodiscard]] Eigen::Index n_taps() const { return amplitudes.size(); }
  [[nodiscard]] Eigen::VectorXd delays_s() const;
};

/// One realization of the multipath channel from a single transmitter node.
/// tap_gains[p] = amplitudes[p] * v_p with v_p ~ CN(0,1) i.i.d.
struct NodeChannel {
  PowerDelayProfile pdp;
  Eigen::VectorXcd tap_gains;
  double rx_phase_offset = 0.0;
};

/// Complex channel gains evaluated on a subcarrier grid.
struct FrequencyResponse {
  Eigen::VectorXd frequencies_hz;
  Eigen::VectorXcd gains;
};

/// Profile from tap delays (ns) and relative powers (dB), normalized to unit
/// total power. Taps must be sorted by delay.
PowerDelayProfile make_profile(const std::vector<double>& delays_ns,
                               const std::vector<double>& powers_db);

/// 3GPP Extended Pedestrian A profile, 7 Rayleigh taps.
PowerDelayProfile epa_profile();

/// Draws i.i.d. CN(0,1) fading on every tap. Deterministic given the rng state.
NodeChannel sample_node_channel(const PowerDelayProfile& pdp, Rng& rng);

/// H(f) = e^{j rx_phase_offset} * sum_p tap_gains[p] e^{-j 2 pi f tau_p},
/// evaluated at each requested frequency.
FrequencyResponse frequency_response(const NodeChannel& ch,
                                     const Eigen::VectorXd& frequencies_hz);

/// Same response on a uniform grid f0 + k*df, k = 0..n-1, evaluated with
/// per-tap phasor recurrences (one complex multiply per tap per subcarrier).
Eigen::VectorXcd frequency_response_grid(const NodeChannel& ch, double f0_hz,
                                         double df_hz, Eigen::Index n);

/// Analytic frequency correlation E[H(f) H*(f + df)] = sum_p A_p^2 e^{j 2 pi df tau_p}.
std::complex<double> pdp_frequency_correlation(const PowerDelayProfile& pdp,
                                               double delta_f_hz);

}  // namespace dbs
