// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#pragma once

#include <cstddef>
#include <vector>

namespace dbs {

/// Inverse of Q(x) = P(N(0,1) > x) for p in (0, 1). Accurate to ~1e-14.
double inverse_q(double p);

/// Empirical eps-quantile by order statistic: the ceil(eps * n)-th smallest.
/// Sorts the samples in place.
double empirical_quantile(std::vector<double>& samples, double eps);

/// Pairwise (cascade) summation in a fixed order; used so aggregated results
/// do not depend on how trials were distributed over workers.
double pairwise_sum(const double* data, std::size_t n);
double pairwise_sum(const std::vector<double>& data);
double pairwise_mean(const std::vector<double>& data);

}  // namespace dbs
