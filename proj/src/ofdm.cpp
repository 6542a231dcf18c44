// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#include "dbs/ofdm.hpp"

#include <cmath>
#include <stdexcept>

namespace dbs {

namespace {
constexpr double kPi = 3.14159265358979323846;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}
}  // namespace

Eigen::VectorXd OfdmConfig::subcarrier_frequencies() const {
  Eigen::VectorXd f(n_subcarriers);
  const double mid = static_cast<double>(n_subcarriers - 1) / 2.0;
  for (Eigen::Index k = 0; k < n_subcarriers; ++k)
    f[k] = (static_cast<double>(k) - mid) * subcarrier_spacing_hz;
  return f;
}

void OfdmConfig::validate() const {
  if (n_subcarriers < 1 || n_pilot_subcarriers < 1 || fft_size < n_subcarriers)
    throw std::invalid_argument("OfdmConfig: inconsistent subcarrier counts");
  if (n_pilot_subcarriers > n_subcarriers)
    throw std::invalid_argument("OfdmConfig: more pilots than subcarriers");
  if (!(subcarrier_spacing_hz > 0.0) || !(subframe_s > 0.0) || symbols_per_subframe < 1)
    throw std::invalid_argument("OfdmConfig: invalid timing parameters");
  if (grid2d_pilot_symbols_per_subframe < 1 ||
      grid2d_pilot_symbols_per_subframe > symbols_per_subframe)
    throw std::invalid_argument("OfdmConfig: invalid 2D-grid pilot symbol count");
  if (static_cast<double>(n_subcarriers) * subcarrier_spacing_hz > bandwidth_hz)
    throw std::invalid_argument("OfdmConfig: occupied band exceeds bandwidth");
}

PilotGrid comb_grid(const OfdmConfig& cfg) {
  cfg.validate();
  if (cfg.n_subcarriers % cfg.n_pilot_subcarriers != 0)
    throw std::invalid_argument("comb_grid: pilot spacing is not integral");
  const Eigen::Index spacing = cfg.n_subcarriers / cfg.n_pilot_subcarriers;
  PilotGrid grid;
  grid.arrangement = PilotArrangement::Comb;
  grid.indices.resize(cfg.n_pilot_subcarriers);
  for (Eigen::Index p = 0; p < cfg.n_pilot_subcarriers; ++p)
    grid.indices[p] = static_cast<int>(p * spacing);
  return grid;
}

Eigen::VectorXcd lowpass_interpolate(const Eigen::VectorXcd& pilot_values, const PilotGrid& grid,
                                     Eigen::Index n_subcarriers) {
  if (grid.arrangement != PilotArrangement::Comb)
    throw std::invalid_argument("lowpass_interpolate: requires a comb arrangement");
  const Eigen::Index n_pilots = grid.n_pilots();
  if (pilot_values.size() != n_pilots)
    throw std::invalid_argument("lowpass_interpolate: pilot value count mismatch");
  const Eigen::Index s = grid.spacing();
  if (s == 1) return pilot_values;

  // Windowed-sinc taps, zero at nonzero pilot offsets so pilots pass through.
  const Eigen::Index half = 4 * s;
  Eigen::VectorXd taps(2 * half + 1);
  for (Eigen::Index i = -half; i <= half; ++i) {
    const double w = 0.54 + 0.46 * std::cos(kPi * static_cast<double>(i) / static_cast<double>(half));
    taps[i + half] = sinc(static_cast<double>(i) / static_cast<double>(s)) * w;
  }

  // Symmetric (edge-repeating) extension of the pilot sequence.
  const auto pilot_at = [&](Eigen::Index q) {
    if (q < 0) q = -1 - q;
    if (q >= n_pilots) q = 2 * n_pilots - 1 - q;
    return pilot_values[q];
  };

  Eigen::VectorXcd out(n_subcarriers);
  for (Eigen::Index m = 0; m < n_subcarriers; ++m) {
    // Pilots q with |m - s q| <= half contribute.
    std::complex<double> acc{0.0, 0.0};
    double norm = 0.0;
    for (Eigen::Index q = (m - half) / s - 1; q <= (m + half) / s + 1; ++q) {
      const Eigen::Index offset = m - s * q;
      if (offset < -half || offset > half) continue;
      const double g = taps[offset + half];
      acc += pilot_at(q) * g;
      norm += g;
    }
    out[m] = acc / norm;
  }
  return out;
}

Eigen::MatrixXcd node_frequency_matrix(const std::vector<NodeChannel>& channels,
                                       const OfdmConfig& cfg) {
  const Eigen::Index n = static_cast<Eigen::Index>(channels.size());
  const Eigen::Index k = cfg.n_subcarriers;
  const double mid = static_cast<double>(k - 1) / 2.0;
  const double f0 = -mid * cfg.subcarrier_spacing_hz;
  Eigen::MatrixXcd h(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    h.row(i) = frequency_response_grid(channels[static_cast<std::size_t>(i)], f0,
                                       cfg.subcarrier_spacing_hz, k);
  return h;
}

WidebandEstimate wideband_dost(const std::vector<NodeChannel>& channels, const OfdmConfig& cfg,
                               const PilotGrid& grid, Eigen::Index training_length,
                               double snr_per_node_db, const std::optional<QuantizerSpec>& q,
                               Rng rng) {
  return wideband_dost(node_frequency_matrix(channels, cfg), grid, training_length,
                       snr_per_node_db, q, rng);
}

WidebandEstimate wideband_dost(const Eigen::MatrixXcd& true_gains, const PilotGrid& grid,
                               Eigen::Index training_length, double snr_per_node_db,
                               const std::optional<QuantizerSpec>& q, Rng rng) {
  const Eigen::Index n = true_gains.rows();
  const Eigen::Index n_subcarriers = true_gains.cols();
  if (n < 1) throw std::invalid_argument("wideband_dost: needs at least one node");
  if (training_length < n)
    throw std::invalid_argument("wideband_dost: training length must be >= n_nodes");
  const double noise_var = std::pow(10.0, -snr_per_node_db / 10.0);
  const TrainingMatrix training = dft_training(training_length, n);

  WidebandEstimate est;
  est.per_node_pilot.resize(n, grid.n_pilots());
  est.per_node.resize(n, n_subcarriers);
  for (Eigen::Index p = 0; p < grid.n_pilots(); ++p) {
    Rng pilot_rng = rng.fork(static_cast<std::uint64_t>(p));
    const Eigen::VectorXcd gains = true_gains.col(grid.indices[p]);
    est.per_node_pilot.col(p) = dost_round(gains, training, noise_var, q, pilot_rng);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    est.per_node.row(i) =
        lowpass_interpolate(est.per_node_pilot.row(i).transpose(), grid, n_subcarriers)
            .transpose();
  return est;
}

double training_time_s(const OfdmConfig& cfg, Eigen::Index n_nodes,
                       PilotArrangement arrangement) {
  if (n_nodes < 0) throw std::invalid_argument("training_time_s: negative node count");
  const double symbols = static_cast<double>(n_nodes);
  switch (arrangement) {
    case PilotArrangement::Comb:
    case PilotArrangement::Block:
      return symbols * cfg.ofdm_symbol_s();
    case PilotArrangement::Grid2d:
      return symbols *
             (static_cast<double>(cfg.symbols_per_subframe) /
              static_cast<double>(cfg.grid2d_pilot_symbols_per_subframe)) *
             cfg.ofdm_symbol_s();
  }
  throw std::invalid_argument("training_time_s: unknown arrangement");
}

WidebandRss wideband_rss(const WidebandEstimate& estimate, const Eigen::MatrixXcd& true_gains) {
  const Eigen::Index n = true_gains.rows();
  const Eigen::Index k = true_gains.cols();
  if (estimate.per_node.rows() != n || estimate.per_node.cols() != k)
    throw std::invalid_argument("wideband_rss: estimate dimension mismatch");
  WidebandRss out;
  out.per_subcarrier.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    std::complex<double> acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> e = estimate.per_node(i, c);
      const double mag = std::abs(e);
      acc += (mag > 0.0) ? std::conj(e) / mag * true_gains(i, c) : true_gains(i, c);
    }
    out.per_subcarrier[c] = std::abs(acc) / static_cast<double>(n);
  }
  out.average = out.per_subcarrier.mean();
  return out;
}

WidebandRss wideband_rss(const WidebandEstimate& estimate,
                         const std::vector<NodeChannel>& channels, const OfdmConfig& cfg) {
  return wideband_rss(estimate, node_frequency_matrix(channels, cfg));
}

WidebandRss ideal_wideband_rss(const Eigen::MatrixXcd& true_gains) {
  WidebandRss out;
  out.per_subcarrier =
      true_gains.cwiseAbs().colwise().sum().transpose() / static_cast<double>(true_gains.rows());
  out.average = out.per_subcarrier.mean();
  return out;
}

}  // namespace dbs
