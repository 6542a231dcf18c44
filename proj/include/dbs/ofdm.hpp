// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dbs/beamforming.hpp"
#include "dbs/channel.hpp"
#include "dbs/rng.hpp"

namespace dbs {

/// OFDM plan. Training and estimation run at the per-subcarrier complex-gain
/// level (pilot symbols are unit-modulus and removed by conjugate
/// multiplication), so no time-domain synthesis is involved.
struct OfdmConfig {
  double bandwidth_hz = 20e6;
  Eigen::Index n_subcarriers = 1200;
  Eigen::Index n_pilot_subcarriers = 200;
  Eigen::Index fft_size = 2048;
  double subcarrier_spacing_hz = 15e3;
  double subframe_s = 1e-3;
  int symbols_per_subframe = 14;
  int grid2d_pilot_symbols_per_subframe = 2;
  double doppler_spread_hz = 5.0;  // metadata; enters no computation

  [[nodiscard]] double ofdm_symbol_s() const {
    return subframe_s / static_cast<double>(symbols_per_subframe);
  }

  /// Baseband subcarrier offsets, centered on 0.
  [[nodiscard]] Eigen::VectorXd subcarrier_frequencies() const;

  void validate() const;
};

enum class PilotArrangement { Comb, Block, Grid2d };

struct PilotGrid {
  Eigen::VectorXi indices;  // sorted subcarrier indices
  PilotArrangement arrangement = PilotArrangement::Comb;

  [[nodiscard]] Eigen::Index n_pilots() const { return indices.size(); }
  [[nodiscard]] Eigen::Index spacing() const {
    return indices.size() > 1 ? static_cast<Eigen::Index>(indices[1] - indices[0]) : 1;
  }
};

/// Equispaced comb: n_pilot_subcarriers indices starting at 0. The spacing
/// n_subcarriers / n_pilot_subcarriers must be integral.
PilotGrid comb_grid(const OfdmConfig& cfg);

/// Zero-insertion upsampling by the comb spacing followed by a windowed-sinc
/// lowpass (length 8*spacing + 1, Hamming window, cutoff at half the pilot
/// rate), with symmetric edge extension and per-position gain compensation.
/// Pilot positions are reproduced exactly.
Eigen::VectorXcd lowpass_interpolate(const Eigen::VectorXcd& pilot_values, const PilotGrid& grid,
                                     Eigen::Index n_subcarriers);

/// True per-node frequency response matrix (node x subcarrier).
Eigen::MatrixXcd node_frequency_matrix(const std::vector<NodeChannel>& channels,
                                       const OfdmConfig& cfg);

/// Channel estimates on the pilot comb and their interpolation to the full
/// subcarrier grid, per node.
struct WidebandEstimate {
  Eigen::MatrixXcd per_node;        // node x n_subcarriers
  Eigen::MatrixXcd per_node_pilot;  // node x n_pilots
};

/// Independent DOST batch per pilot subcarrier (same DFT training matrix,
/// independent noise), then lowpass interpolation of each node's pilot
/// estimates to every subcarrier. The rng is consumed by value; pilot
/// subcarriers use forked streams.
WidebandEstimate wideband_dost(const std::vector<NodeChannel>& channels, const OfdmConfig& cfg,
                               const PilotGrid& grid, Eigen::Index training_length,
                               double snr_per_node_db, const std::optional<QuantizerSpec>& q,
                               Rng rng);

/// Matrix-level core of the above for callers that already hold the true
/// gains (node x subcarrier).
WidebandEstimate wideband_dost(const Eigen::MatrixXcd& true_gains, const PilotGrid& grid,
                               Eigen::Index training_length, double snr_per_node_db,
                               const std::optional<QuantizerSpec>& q, Rng rng);

/// Minimum training duration: Comb and Block concentrate pilots in time
/// (L = n_nodes OFDM symbols); the 2D grid places pilots on
/// grid2d_pilot_symbols_per_subframe of the symbols_per_subframe symbols,
/// stretching training by that ratio.
double training_time_s(const OfdmConfig& cfg, Eigen::Index n_nodes, PilotArrangement arrangement);

struct WidebandRss {
  Eigen::VectorXd per_subcarrier;  // normalized RSS per subcarrier
  double average = 0.0;            // linear-domain mean over subcarriers
};

/// Applies phase-only weights e^{-j arg estimate} per node and subcarrier and
/// evaluates the noiseless normalized RSS against the true gains.
WidebandRss wideband_rss(const WidebandEstimate& estimate, const Eigen::MatrixXcd& true_gains);
WidebandRss wideband_rss(const WidebandEstimate& estimate,
                         const std::vector<NodeChannel>& channels, const OfdmConfig& cfg);

/// Per-subcarrier RSS of perfect phase alignment, (sum_i |H_i(f_k)|) / N.
WidebandRss ideal_wideband_rss(const Eigen::MatrixXcd& true_gains);

}  // namespace dbs
