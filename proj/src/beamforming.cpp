// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#include "dbs/beamforming.hpp"

#include <algorithm>
#include <cmath>

namespace dbs {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

std::complex<double> noisy_sum(const Eigen::VectorXcd& weights, const Eigen::VectorXcd& gains,
                               double noise_var, Rng& rng) {
  std::complex<double> r = weights.cwiseProduct(gains).sum();
  if (noise_var > 0.0) r += std::sqrt(noise_var) * rng.cgaussian();
  return r;
}

/// Measured |R| for the perturbed weights w .* e^{j delta}.
double measure_perturbed(const Eigen::VectorXcd& weights, const Eigen::VectorXcd& delta_phasor,
                         const Eigen::VectorXcd& gains, double noise_var, Rng& rng) {
  std::complex<double> r = (weights.cwiseProduct(delta_phasor)).cwiseProduct(gains).sum();
  if (noise_var > 0.0) r += std::sqrt(noise_var) * rng.cgaussian();
  return std::abs(r);
}

void record_measurement(PerturbationState& s, double r, int window) {
  if (window > 0) {
    s.window_history.push_back(r);
    while (s.window_history.size() > static_cast<std::size_t>(window))
      s.window_history.pop_front();
    s.r_best = *std::max_element(s.window_history.begin(), s.window_history.end());
  } else {
    s.r_best = std::max(s.r_best, r);
  }
}

void prime_best(PerturbationState& s, const Eigen::VectorXcd& gains, double noise_var, Rng& rng,
                int window) {
  if (s.primed) return;
  const double r0 = std::abs(noisy_sum(s.weights, gains, noise_var, rng));
  s.primed = true;
  record_measurement(s, r0, window);
}

void draw_perturbation(double half_width_rad, Eigen::VectorXd& delta, Eigen::VectorXcd& phasor,
                       Rng& rng) {
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    delta[i] = rng.uniform(-half_width_rad, half_width_rad);
    phasor[i] = std::polar(1.0, delta[i]);
  }
}

/// Noiseless RSS from unnormalized complex estimates: each node applies
/// e^{-j arg(est)}, nodes without an estimate yet transmit with weight 1.
double rss_from_estimates(const Eigen::VectorXcd& estimates, const Eigen::VectorXcd& gains) {
  std::complex<double> acc{0.0, 0.0};
  for (Eigen::Index n = 0; n < gains.size(); ++n) {
    const double mag = std::abs(estimates[n]);
    acc += (mag > 0.0) ? std::conj(estimates[n]) / mag * gains[n] : gains[n];
  }
  return std::abs(acc) / static_cast<double>(gains.size());
}

}  // namespace

TrainingMatrix dft_training(Eigen::Index length, Eigen::Index n_nodes) {
  if (n_nodes < 1 || length < n_nodes)
    throw std::invalid_argument("dft_training: requires 1 <= n_nodes <= length");
  TrainingMatrix a;
  a.kind = TrainingKind::Dft;
  a.entries.resize(length, n_nodes);
  for (Eigen::Index l = 0; l < length; ++l)
    for (Eigen::Index n = 0; n < n_nodes; ++n)
      a.entries(l, n) = std::polar(1.0, -2.0 * kPi * static_cast<double>(n) *
                                            static_cast<double>(l) / static_cast<double>(length));
  return a;
}

TrainingMatrix identity_training(Eigen::Index n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("identity_training: n_nodes must be positive");
  TrainingMatrix a;
  a.kind = TrainingKind::Identity;
  a.entries = Eigen::MatrixXcd::Identity(n_nodes, n_nodes);
  return a;
}

TrainingMatrix custom_training(Eigen::MatrixXcd entries) {
  if (entries.size() == 0) throw std::invalid_argument("custom_training: empty matrix");
  TrainingMatrix a;
  a.kind = TrainingKind::Custom;
  a.entries = std::move(entries);
  return a;
}

QuantizerSpec QuantizerSpec::for_training(int bits_total, double rx_power, double noise_var,
                                          double clip_multiplier) {
  if (bits_total < 2 || bits_total % 2 != 0)
    throw std::invalid_argument("QuantizerSpec: bits_total must be even and >= 2");
  if (!(rx_power >= 0.0) || !(noise_var >= 0.0) || !(clip_multiplier > 0.0))
    throw std::invalid_argument("QuantizerSpec: invalid power/clip parameters");
  QuantizerSpec q;
  q.bits_total = bits_total;
  q.clip_multiplier = clip_multiplier;
  const double sigma = std::sqrt((rx_power + noise_var) / 2.0);
  q.step = 2.0 * clip_multiplier * sigma / static_cast<double>(q.levels_per_component());
  return q;
}

std::complex<double> quantize(std::complex<double> sample, const QuantizerSpec& q) {
  if (q.bits_total < 2 || q.bits_total % 2 != 0)
    throw std::invalid_argument("quantize: bits_total must be even and >= 2");
  if (!(q.step > 0.0)) throw std::invalid_argument("quantize: step must be positive");
  const double vmax = (static_cast<double>(q.levels_per_component()) / 2.0 - 0.5) * q.step;
  const auto component = [&](double x) {
    const double v = (std::floor(x / q.step) + 0.5) * q.step;
    return std::clamp(v, -vmax, vmax);
  };
  return {component(sample.real()), component(sample.imag())};
}

Eigen::VectorXcd least_squares_estimate(const Eigen::VectorXcd& observations,
                                        const TrainingMatrix& training) {
  if (training.length() < training.n_nodes())
    throw std::invalid_argument("least_squares_estimate: training length must be >= n_nodes");
  if (observations.size() != training.length())
    throw std::invalid_argument("least_squares_estimate: observation length mismatch");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(training.entries);
  if (qr.rank() < training.n_nodes())
    throw std::invalid_argument("least_squares_estimate: training matrix is rank-deficient");
  return qr.solve(observations);
}

Eigen::VectorXcd correlation_estimate(const Eigen::VectorXcd& observations,
                                      const TrainingMatrix& training) {
  if (observations.size() != training.length())
    throw std::invalid_argument("correlation_estimate: observation length mismatch");
  return training.entries.adjoint() * observations / static_cast<double>(training.length());
}

Eigen::VectorXcd dost_round(const Eigen::VectorXcd& gains, const TrainingMatrix& training,
                            double noise_var, const std::optional<QuantizerSpec>& q, Rng& rng) {
  const Eigen::Index n = training.n_nodes();
  const Eigen::Index length = training.length();
  if (gains.size() != n) throw std::invalid_argument("dost_round: gain dimension mismatch");
  if (length < n) throw std::invalid_argument("dost_round: training length must be >= n_nodes");
  if (training.kind == TrainingKind::Custom) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(training.entries);
    if (qr.rank() < n) throw std::invalid_argument("dost_round: training matrix is rank-deficient");
  }
  Eigen::VectorXcd corr = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index l = 0; l < length; ++l) {
    std::complex<double> y = (training.entries.row(l) * gains)(0);
    if (noise_var > 0.0) y += std::sqrt(noise_var) * rng.cgaussian();
    if (q) y = quantize(y, *q);
    corr.noalias() += training.entries.row(l).adjoint() * y;
  }
  return corr / static_cast<double>(length);
}

Eigen::VectorXcd sddb_round(const Eigen::VectorXcd& gains, double noise_var,
                            const std::optional<QuantizerSpec>& q, Rng& rng) {
  Eigen::VectorXcd est(gains.size());
  for (Eigen::Index t = 0; t < gains.size(); ++t) {
    std::complex<double> y = gains[t];
    if (noise_var > 0.0) y += std::sqrt(noise_var) * rng.cgaussian();
    est[t] = q ? quantize(y, *q) : y;
  }
  return est;
}

std::uint8_t obf_step(ObfState& state, const Eigen::VectorXcd& gains, double noise_var,
                      const ObfConfig& cfg, Rng& rng) {
  prime_best(state, gains, noise_var, rng, cfg.window);

  Eigen::VectorXd delta(gains.size());
  Eigen::VectorXcd phasor(gains.size());
  draw_perturbation(cfg.perturb_deg * kDegToRad, delta, phasor, rng);
  const double r = measure_perturbed(state.weights, phasor, gains, noise_var, rng);

  const bool keep = r > state.r_best;
  if (keep) {
    state.phases += delta;
    state.weights = state.weights.cwiseProduct(phasor);
  }
  record_measurement(state, r, cfg.window);
  ++state.iteration;
  return keep ? 1 : 0;
}

std::uint8_t r2bf_step(R2bfState& state, const Eigen::VectorXcd& gains, double noise_var,
                       const R2bfConfig& cfg, Rng& rng) {
  if (!(cfg.beta1 < cfg.beta2 && cfg.beta2 < cfg.beta3) || !(cfg.beta1 > 0.0))
    throw std::invalid_argument("r2bf_step: requires 0 < beta1 < beta2 < beta3");
  if (!(cfg.xi1 > 0.0 && cfg.xi1 < cfg.xi2))
    throw std::invalid_argument("r2bf_step: requires 0 < xi1 < xi2");
  prime_best(state, gains, noise_var, rng, cfg.window);

  const double half_width =
      state.beta > 0.0 ? kPi / state.beta : cfg.initial_perturb_deg * kDegToRad;
  Eigen::VectorXd delta(gains.size());
  Eigen::VectorXcd phasor(gains.size());
  draw_perturbation(half_width, delta, phasor, rng);
  const double r = measure_perturbed(state.weights, phasor, gains, noise_var, rng);

  std::uint8_t code = 0b00;
  if (r > state.r_best) {
    const double ratio = r / state.rss_max;
    code = ratio < cfg.xi1 ? 0b01 : (ratio < cfg.xi2 ? 0b10 : 0b11);
    state.phases += delta;
    state.weights = state.weights.cwiseProduct(phasor);
    state.beta = code == 0b01 ? cfg.beta1 : (code == 0b10 ? cfg.beta2 : cfg.beta3);
  }
  record_measurement(state, r, cfg.window);
  ++state.iteration;
  return code;
}

std::uint8_t m2bf_step(M2bfState& state, const Eigen::VectorXcd& gains, double noise_var,
                       const M2bfConfig& cfg, Rng& rng) {
  if (!(cfg.alpha1 > 0.0) || !(cfg.alpha2 < 0.0))
    throw std::invalid_argument("m2bf_step: requires alpha1 > 0 > alpha2");
  prime_best(state, gains, noise_var, rng, cfg.window);

  Eigen::VectorXcd phasor(gains.size());
  switch (state.next) {
    case M2bfState::Next::Fresh:
      draw_perturbation(state.range, state.delta, phasor, rng);
      break;
    case M2bfState::Next::Negate:
      state.delta = -state.delta;
      [[fallthrough]];
    case M2bfState::Next::Repeat:
      for (Eigen::Index i = 0; i < phasor.size(); ++i) phasor[i] = std::polar(1.0, state.delta[i]);
      break;
  }
  const double r = measure_perturbed(state.weights, phasor, gains, noise_var, rng);

  const double diff = r - state.r_best;
  std::uint8_t code;
  if (diff >= cfg.alpha1)
    code = 0b11;
  else if (diff >= 0.0)
    code = 0b10;
  else if (diff > cfg.alpha2)
    code = 0b01;
  else
    code = 0b00;

  if ((code & 0b10) != 0) {  // improvement: keep the perturbation
    state.phases += state.delta;
    state.weights = state.weights.cwiseProduct(phasor);
  }
  state.next = code == 0b11 ? M2bfState::Next::Repeat
                            : (code == 0b00 ? M2bfState::Next::Negate : M2bfState::Next::Fresh);
  record_measurement(state, r, cfg.window);
  state.range = std::max(state.range * cfg.range_decay, cfg.range_floor_deg * kDegToRad);
  ++state.iteration;
  return code;
}

AdaptationTrace run_adaptation(const AdaptationConfig& cfg, const Eigen::VectorXcd& gains,
                               double snr_per_node_db, Eigen::Index iterations, Rng rng) {
  const Eigen::Index n = gains.size();
  if (n < 1) throw std::invalid_argument("run_adaptation: needs at least one node");
  if (iterations < 0) throw std::invalid_argument("run_adaptation: negative iteration count");
  const double noise_var = std::pow(10.0, -snr_per_node_db / 10.0);

  AdaptationTrace trace;
  trace.rss.resize(iterations + 1);
  trace.rss[0] = std::abs(gains.sum()) / static_cast<double>(n);

  switch (cfg.algorithm) {
    case Algorithm::Dost:
    case Algorithm::Sddb: {
      const bool dost = cfg.algorithm == Algorithm::Dost;
      const Eigen::Index length =
          dost ? (cfg.training_length > 0 ? cfg.training_length : n) : n;
      if (dost && length < n)
        throw std::invalid_argument("run_adaptation: DOST training length must be >= n_nodes");
      const TrainingMatrix training = dost ? dft_training(length, n) : identity_training(n);
      std::optional<QuantizerSpec> q;
      if (cfg.feedback_bits > 0)
        q = QuantizerSpec::for_training(cfg.feedback_bits, dost ? static_cast<double>(n) : 1.0,
                                        noise_var, cfg.clip_multiplier);
      Eigen::VectorXcd corr = Eigen::VectorXcd::Zero(n);
      for (Eigen::Index t = 1; t <= iterations; ++t) {
        if (t <= length) {
          const Eigen::Index l = t - 1;
          std::complex<double> y = (training.entries.row(l) * gains)(0);
          if (noise_var > 0.0) y += std::sqrt(noise_var) * rng.cgaussian();
          if (q) y = quantize(y, *q);
          corr.noalias() += training.entries.row(l).adjoint() * y;
        }
        trace.rss[t] = rss_from_estimates(corr, gains);
      }
      break;
    }
    case Algorithm::Obf: {
      ObfState state(n);
      for (Eigen::Index t = 1; t <= iterations; ++t) {
        obf_step(state, gains, noise_var, cfg.obf, rng);
        trace.rss[t] = normalized_rss(state.weights, gains);
      }
      break;
    }
    case Algorithm::R2bf: {
      R2bfState state(n, gains.cwiseAbs().sum());
      for (Eigen::Index t = 1; t <= iterations; ++t) {
        r2bf_step(state, gains, noise_var, cfg.r2bf, rng);
        trace.rss[t] = normalized_rss(state.weights, gains);
      }
      break;
    }
    case Algorithm::M2bf: {
      M2bfState state(n, cfg.m2bf.initial_range_deg * kDegToRad);
      for (Eigen::Index t = 1; t <= iterations; ++t) {
        m2bf_step(state, gains, noise_var, cfg.m2bf, rng);
        trace.rss[t] = normalized_rss(state.weights, gains);
      }
      break;
    }
    default:
      throw std::invalid_argument("run_adaptation: unknown algorithm");
  }

  trace.converged_gain_db =
      beamforming_gain_db(static_cast<double>(n) * trace.rss[trace.rss.size() - 1]);
  return trace;
}

}  // namespace dbs
