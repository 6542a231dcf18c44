// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#include "dbs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dbs {

namespace {

// Acklam's rational approximation to the standard normal quantile.
double norm_ppf_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double inverse_q(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_q: p must be in (0, 1)");
  double x = -norm_ppf_approx(p);
  // One Halley refinement against erfc.
  for (int i = 0; i < 2; ++i) {
    const double e = 0.5 * std::erfc(x / std::sqrt(2.0)) - p;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
    const double u = e / pdf;  // Q'(x) = -pdf
    x += u / (1.0 - 0.5 * x * u);
  }
  return x;
}

double empirical_quantile(std::vector<double>& samples, double eps) {
  if (samples.empty()) throw std::invalid_argument("empirical_quantile: empty sample set");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("empirical_quantile: eps must be in (0, 1)");
  const auto n = samples.size();
  auto k = static_cast<std::size_t>(std::ceil(eps * static_cast<double>(n)));
  if (k < 1) k = 1;
  if (k > n) k = n;
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   samples.end());
  return samples[k - 1];
}

double pairwise_sum(const double* data, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double pairwise_sum(const std::vector<double>& data) { return pairwise_sum(data.data(), data.size()); }

double pairwise_mean(const std::vector<double>& data) {
  if (data.empty()) throw std::invalid_argument("pairwise_mean: empty data");
  return pairwise_sum(data) / static_cast<double>(data.size());
}

}  // namespace dbs
