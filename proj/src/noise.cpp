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

#include "qnl/noise.hpp"

#include <cmath>
#include <random>

#include "qnl/spectral.hpp"

namespace qnl {

NoiseRealization white_noise(std::uint64_t seed, double rms, std::size_t n) {
  if (!(rms >= 0.0) || !std::isfinite(rms)) throw InvalidInput("noise rms must be finite and >= 0");
  if (n == 0) throw InvalidInput("noise length must be >= 1");
  NoiseRealization out;
  out.seed = seed;
  out.rms = rms;
  out.in_phase.resize(n);
  out.quadrature.resize(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.in_phase[i] = rms * normal(rng);
    out.quadrature[i] = rms * normal(rng);
  }
  return out;
}

std::vector<double> pink_noise(std::uint64_t seed, std::size_t n, double sample_period, double amplitude) {
  if (n < 64 || !is_power_of_two(n)) throw InvalidInput("pink_noise length must be a power of two >= 64");
  if (!std::isfinite(amplitude)) throw InvalidInput("pink_noise amplitude must be finite");
  if (amplitude == 0.0) return std::vector<double>(n, 0.0);
  const double coefficient = amplitude * amplitude;
  return shaped_noise(seed, n, sample_period, [coefficient](double f) { return coefficient / f; });
}

double snr_db(const SnrSpec& link) {
  if (!(link.bandwidth_hz > 0.0)) throw InvalidInput("bandwidth must be positive");
  return link.signal_power_dbm + link.gain_db - link.noise_power_dbm;
}

double snr_linear(const SnrSpec& link) { return std::pow(10.0, snr_db(link) / 10.0); }

double noise_rms_for_snr(double target_snr, double signal_rms, double bandwidth_factor) {
  if (!(target_snr > 0.0)) throw InvalidInput("target SNR must be positive");
  if (!(signal_rms >= 0.0)) throw InvalidInput("signal rms must be >= 0");
  if (!(bandwidth_factor > 0.0)) throw InvalidInput("bandwidth factor must be positive");
  return signal_rms * std::sqrt(bandwidth_factor / target_snr);
}

double snr_for_noise_rms(double noise_rms, double signal_rms, double bandwidth_factor) {
  if (!(noise_rms > 0.0)) throw InvalidInput("noise rms must be positive");
  const double ratio = signal_rms / noise_rms;
  return bandwidth_factor * ratio * ratio;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ (c + 0x85157AF5ULL));
  return h;
}

}  // namespace qnl
