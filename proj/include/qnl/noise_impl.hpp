// Copyright 2026 The QNL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Template definitions for noise.hpp. Not meant to be included directly.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace qnl {

template <typename PsdFn>
std::vector<double> shaped_noise(std::uint64_t seed, std::size_t n, double sample_period,
                                 PsdFn&& one_sided_psd) {
  if (n < 2) throw InvalidInput("shaped_noise: need at least two samples");
  if (!(sample_period > 0.0)) throw InvalidInput("shaped_noise: sample_period must be positive");

  const double n_d = static_cast<double>(n);
  const double df = 1.0 / (n_d * sample_period);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);

  std::vector<std::complex<double>> spectrum(n, {0.0, 0.0});
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k <= half; ++k) {
    const double f = static_cast<double>(k) * df;
    const double psd = one_sided_psd(f);
    if (psd < 0.0 || !std::isfinite(psd)) throw InvalidInput("shaped_noise: PSD must be finite and >= 0");
    const double theta = phase_dist(rng);
    if (2 * k == n) {
      // Nyquist bin is its own mirror and must stay real.
      const double mag = std::sqrt(psd * n_d / sample_period);
      spectrum[k] = std::cos(theta) >= 0.0 ? mag : -mag;
    } else {
      const double mag = std::sqrt(psd * n_d / (2.0 * sample_period));
      spectrum[k] = std::polar(mag, theta);
      spectrum[n - k] = std::conj(spectrum[k]);
    }
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> time_domain;
  fft.inv(time_domain, spectrum);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = time_domain[i].real();
  return out;
}

template <typename PsdFn>
double shaped_noise_variance(std::size_t n, double sample_period, PsdFn&& one_sided_psd) {
  const double df = 1.0 / (static_cast<double>(n) * sample_period);
  double var = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) var += one_sided_psd(static_cast<double>(k) * df) * df;
  return var;
}

}  // namespace qnl
