// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#include "dbs/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace dbs {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

Eigen::VectorXd PowerDelayProfile::delays_s() const {
  Eigen::VectorXd d(n_taps());
  for (Eigen::Index p = 0; p < d.size(); ++p) d[p] = taps[static_cast<std::size_t>(p)].delay_s;
  return d;
}

PowerDelayProfile make_profile(const std::vector<double>& delays_ns,
                               const std::vector<double>& powers_db) {
  if (delays_ns.empty() || delays_ns.size() != powers_db.size())
    throw std::invalid_argument("make_profile: delay/power lists must be non-empty and equal-sized");

  PowerDelayProfile pdp;
  pdp.taps.reserve(delays_ns.size());
  Eigen::VectorXd power(static_cast<Eigen::Index>(delays_ns.size()));
  for (std::size_t p = 0; p < delays_ns.size(); ++p) {
    if (delays_ns[p] < 0.0) throw std::invalid_argument("make_profile: negative tap delay");
    if (p > 0 && delays_ns[p] < delays_ns[p - 1])
      throw std::invalid_argument("make_profile: taps must be sorted by delay");
    pdp.taps.push_back({delays_ns[p] * 1e-9, powers_db[p], Fading::Rayleigh});
    power[static_cast<Eigen::Index>(p)] = std::pow(10.0, powers_db[p] / 10.0);
  }
  pdp.amplitudes = (power / power.sum()).cwiseSqrt();
  return pdp;
}

PowerDelayProfile epa_profile() {
  static const std::vector<double> delays_ns = {0, 30, 70, 90, 110, 190, 410};
  static const std::vector<double> powers_db = {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8};
  return make_profile(delays_ns, powers_db);
}

NodeChannel sample_node_channel(const PowerDelayProfile& pdp, Rng& rng) {
  NodeChannel ch;
  ch.pdp = pdp;
  ch.tap_gains.resize(pdp.n_taps());
  for (Eigen::Index p = 0; p < pdp.n_taps(); ++p) ch.tap_gains[p] = pdp.amplitudes[p] * rng.cgaussian();
  return ch;
}

FrequencyResponse frequency_response(const NodeChannel& ch,
                                     const Eigen::VectorXd& frequencies_hz) {
  FrequencyResponse fr;
  fr.frequencies_hz = frequencies_hz;
  fr.gains.setZero(frequencies_hz.size());
  const std::complex<double> rx_rot = std::polar(1.0, ch.rx_phase_offset);
  for (Eigen::Index k = 0; k < frequencies_hz.size(); ++k) {
    if (!std::isfinite(frequencies_hz[k]))
      throw std::invalid_argument("frequency_response: non-finite frequency");
    std::complex<double> h{0.0, 0.0};
    for (Eigen::Index p = 0; p < ch.tap_gains.size(); ++p)
      h += ch.tap_gains[p] *
           std::polar(1.0, -kTwoPi * frequencies_hz[k] * ch.pdp.taps[static_cast<std::size_t>(p)].delay_s);
    fr.gains[k] = rx_rot * h;
  }
  return fr;
}

Eigen::VectorXcd frequency_response_grid(const NodeChannel& ch, double f0_hz,
                                         double df_hz, Eigen::Index n) {
  const Eigen::Index np = ch.tap_gains.size();
  Eigen::VectorXcd phasor(np), step(np);
  const std::complex<double> rx_rot = std::polar(1.0, ch.rx_phase_offset);
  for (Eigen::Index p = 0; p < np; ++p) {
    const double tau = ch.pdp.taps[static_cast<std::size_t>(p)].delay_s;
    phasor[p] = rx_rot * ch.tap_gains[p] * std::polar(1.0, -kTwoPi * f0_hz * tau);
    step[p] = std::polar(1.0, -kTwoPi * df_hz * tau);
  }
  Eigen::VectorXcd gains(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    gains[k] = phasor.sum();
    phasor.array() *= step.array();
  }
  return gains;
}

std::complex<double> pdp_frequency_correlation(const PowerDelayProfile& pdp,
                                               double delta_f_hz) {
  std::complex<double> c{0.0, 0.0};
  for (Eigen::Index p = 0; p < pdp.n_taps(); ++p)
    c += pdp.amplitudes[p] * pdp.amplitudes[p] *
         std::polar(1.0, kTwoPi * delta_f_hz * pdp.taps[static_cast<std::size_t>(p)].delay_s);
  return c;
}

}  // namespace dbs
