// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <variant>

#include "dbs/rng.hpp"

namespace dbs {

/// E[|H|] for a unit-power Rayleigh channel, sqrt(pi/4). Used as the
/// single-node amplitude baseline when expressing RSS as a gain in dB.
inline constexpr double kRayleighMeanAmplitude = 0.88622692545275801;

/// 20 log10 of a received sum amplitude relative to the expected single-node
/// amplitude; ideal beamforming with N nodes averages 20 log10 N (the N^2
/// power gain).
inline double beamforming_gain_db(double sum_amplitude) {
  return 20.0 * std::log10(sum_amplitude / kRayleighMeanAmplitude);
}

// ---------------------------------------------------------------------------
// Training matrices
// ---------------------------------------------------------------------------

enum class TrainingKind { Dft, Identity, Custom };

/// L x N matrix of per-slot transmit weights; column n is node n's sequence.
struct TrainingMatrix {
  Eigen::MatrixXcd entries;
  TrainingKind kind = TrainingKind::Custom;

  [[nodiscard]] Eigen::Index length() const { return entries.rows(); }
  [[nodiscard]] Eigen::Index n_nodes() const { return entries.cols(); }
};

/// DFT training: entries(l, n) = e^{-j 2 pi n l / L}. Columns are orthogonal
/// (a_i^H a_j = L delta_ij) and stay orthogonal under cyclic shifts.
TrainingMatrix dft_training(Eigen::Index length, Eigen::Index n_nodes);

/// Identity training (SDDB): node t alone transmits in slot t.
TrainingMatrix identity_training(Eigen::Index n_nodes);

TrainingMatrix custom_training(Eigen::MatrixXcd entries);

// ---------------------------------------------------------------------------
// Feedback quantization
// ---------------------------------------------------------------------------

/// Uniform midrise quantizer applied independently to I and Q. bits_total is
/// the budget per complex sample, split evenly, so each component gets
/// 2^(bits_total/2) levels of width `step` centered on zero, saturating at
/// +/- (levels/2) * step.
struct QuantizerSpec {
  int bits_total = 2;
  double step = 1.0;
  double clip_multiplier = 1.0;

  [[nodiscard]] int levels_per_component() const { return 1 << (bits_total / 2); }

  /// Step chosen so the unsaturated range spans +/- clip * sigma per
  /// component, where sigma^2 = (rx_power + noise_var)/2 is the per-component
  /// variance of the received sample during incoherent training. With
  /// rx_power = N this scales the step as sqrt(N).
  static QuantizerSpec for_training(int bits_total, double rx_power, double noise_var,
                                    double clip_multiplier = 1.0);
};

/// One broadcast feedback item: a quantized I/Q sample (DOST/SDDB) or a 1-2
/// bit code (OBF/R2BF/M2BF).
using FeedbackSample = std::variant<std::complex<double>, std::uint8_t>;

/// Quantizes I and Q to the midrise lattice; saturation is silent.
std::complex<double> quantize(std::complex<double> sample, const QuantizerSpec& q);

// ---------------------------------------------------------------------------
// Signal operations
// ---------------------------------------------------------------------------

/// R = sum_i weights[i] * gains[i] + w, with w ~ CN(0, noise_var).
template <typename DerivedW, typename DerivedH>
std::complex<double> received_sample(const Eigen::MatrixBase<DerivedW>& weights,
                                     const Eigen::MatrixBase<DerivedH>& gains,
                                     double noise_var, Rng& rng) {
  if (weights.size() != gains.size())
    throw std::invalid_argument("received_sample: weight/gain dimension mismatch");
  std::complex<double> r = weights.cwiseProduct(gains).sum();
  if (noise_var > 0.0) r += std::sqrt(noise_var) * rng.cgaussian();
  return r;
}

/// Normalized RSS |sum_i w_i h_i| / N for explicit unit-modulus weights.
template <typename DerivedW, typename DerivedH>
double normalized_rss(const Eigen::MatrixBase<DerivedW>& weights,
                      const Eigen::MatrixBase<DerivedH>& gains) {
  if (weights.size() != gains.size())
    throw std::invalid_argument("normalized_rss: weight/gain dimension mismatch");
  return std::abs(weights.cwiseProduct(gains).sum()) / static_cast<double>(gains.size());
}

/// RSS of perfect conjugate-phase beamforming, (sum_i |h_i|) / N.
template <typename Derived>
double ideal_rss(const Eigen::MatrixBase<Derived>& gains) {
  return gains.cwiseAbs().sum() / static_cast<double>(gains.size());
}

/// Least squares channel estimate (A^H A)^{-1} A^H y.
Eigen::VectorXcd least_squares_estimate(const Eigen::VectorXcd& observations,
                                        const TrainingMatrix& training);

/// Per-node correlation estimate (1/L) A^H y; equals the least squares
/// solution when A^H A = L I.
Eigen::VectorXcd correlation_estimate(const Eigen::VectorXcd& observations,
                                      const TrainingMatrix& training);

// ---------------------------------------------------------------------------
// Batch training rounds (DOST / SDDB)
// ---------------------------------------------------------------------------

/// Runs the L training transmissions of one DOST batch: slot l transmits with
/// weights from row l of the training matrix, the receiver quantizes each
/// complex sample (when a quantizer is given) and every node correlates the
/// feedback with its own sequence. Returns the per-node channel estimates.
Eigen::VectorXcd dost_round(const Eigen::VectorXcd& gains, const TrainingMatrix& training,
                            double noise_var, const std::optional<QuantizerSpec>& q, Rng& rng);

/// Time-multiplexed training: slot t activates node t alone and its estimate
/// is the single (quantized) observation.
Eigen::VectorXcd sddb_round(const Eigen::VectorXcd& gains, double noise_var,
                            const std::optional<QuantizerSpec>& q, Rng& rng);

// ---------------------------------------------------------------------------
// Stochastic-ascent algorithms (OBF / R2BF / M2BF)
// ---------------------------------------------------------------------------

struct ObfConfig {
  double perturb_deg = 10.0;  // delta_i ~ U(-perturb, +perturb)
  int window = 0;             // best-RSS window M; 0 means unbounded
};

struct R2bfConfig {
  // Next perturbation is U(-pi/beta, pi/beta) with beta picked by the code.
  double beta1 = 5.0;
  double beta2 = 10.0;
  double beta3 = 25.0;
  double xi1 = 0.3;
  double xi2 = 0.8;
  double initial_perturb_deg = 10.0;
  int window = 0;  // best-RSS window M; 0 means unbounded
};

struct M2bfConfig {
  double alpha1 = 0.8;
  double alpha2 = -0.8;
  double initial_range_deg = 45.0;
  double range_decay = 0.99;  // per-iteration geometric decay
  double range_floor_deg = 10.0;
  // Improvement is judged against the best of the last `window` measurements;
  // 0 compares against the all-time best.
  int window = 3;
};

/// Shared base: phases plus the unit-modulus weight cache derived from them.
struct PerturbationState {
  explicit PerturbationState(Eigen::Index n_nodes)
      : phases(Eigen::VectorXd::Zero(n_nodes)),
        weights(Eigen::VectorXcd::Ones(n_nodes)) {}

  Eigen::VectorXd phases;
  Eigen::VectorXcd weights;
  double r_best = 0.0;                // best measured |R| within the window
  std::deque<double> window_history;  // measured |R|, newest last (windowed mode)
  bool primed = false;                // r_best seeded with a baseline measurement
  Eigen::Index iteration = 0;
};

struct ObfState : PerturbationState {
  using PerturbationState::PerturbationState;
};

struct R2bfState : PerturbationState {
  R2bfState(Eigen::Index n_nodes, double rss_max_in)
      : PerturbationState(n_nodes), rss_max(rss_max_in) {
    if (!(rss_max > 0.0)) throw std::invalid_argument("R2bfState: rss_max must be positive");
  }
  double rss_max;
  double beta = 0.0;  // 0 until the first improvement code fixes the range
};

struct M2bfState : PerturbationState {
  M2bfState(Eigen::Index n_nodes, double initial_range_rad)
      : PerturbationState(n_nodes),
        delta(Eigen::VectorXd::Zero(n_nodes)),
        range(initial_range_rad) {}
  Eigen::VectorXd delta;  // previous perturbation
  enum class Next { Fresh, Repeat, Negate } next = Next::Fresh;
  double range;
};

/// One OBF iteration; returns the feedback bit (1 keeps the perturbation).
std::uint8_t obf_step(ObfState& state, const Eigen::VectorXcd& gains, double noise_var,
                      const ObfConfig& cfg, Rng& rng);

/// One R2BF iteration; returns the 2-bit code 0b00..0b11.
std::uint8_t r2bf_step(R2bfState& state, const Eigen::VectorXcd& gains, double noise_var,
                       const R2bfConfig& cfg, Rng& rng);

/// One M2BF iteration; returns the 2-bit code 0b00..0b11.
std::uint8_t m2bf_step(M2bfState& state, const Eigen::VectorXcd& gains, double noise_var,
                       const M2bfConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Adaptation driver
// ---------------------------------------------------------------------------

enum class Algorithm { Dost, Sddb, Obf, R2bf, M2bf };

struct AdaptationConfig {
  Algorithm algorithm = Algorithm::Dost;
  int feedback_bits = 2;             // total per complex sample; 0 disables quantization
  double clip_multiplier = 1.0;
  Eigen::Index training_length = 0;  // DOST batch length L; 0 means n_nodes
  ObfConfig obf;
  R2bfConfig r2bf;
  M2bfConfig m2bf;
};

/// Per-iteration noiseless RSS under the weights the nodes would apply from
/// their current state. Algorithm decisions use the noisy measurements; the
/// trace measures beamforming quality.
struct AdaptationTrace {
  Eigen::VectorXd rss;  // rss[0] is the pre-adaptation (all-ones) value
  double converged_gain_db = 0.0;
};

/// Runs `iterations` steps of the selected algorithm against fixed
/// single-subcarrier channel gains. Deterministic given the rng value.
AdaptationTrace run_adaptation(const AdaptationConfig& cfg, const Eigen::VectorXcd& gains,
                               double snr_per_node_db, Eigen::Index iterations, Rng rng);

}  // namespace dbs
