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

#include <cstdint>
#include <vector>

#include "qnl/types.hpp"

namespace qnl {

/// Seeded additive baseband noise, one value per envelope sample.
struct NoiseRealization {
  std::uint64_t seed = 0;
  std::vector<double> in_phase;
  std::vector<double> quadrature;
  double rms = 0.0;  // per-quadrature standard deviation, envelope units

  std::size_t size() const { return in_phase.size(); }
  cdouble operator[](std::size_t i) const { return {in_phase[i], quadrature[i]}; }
};

/// Independent zero-mean Gaussian I/Q streams with standard deviation `rms`.
/// Streams for equal seeds differ only by the `rms` scale factor.
NoiseRealization white_noise(std::uint64_t seed, double rms, std::size_t n);

/// Zero-mean 1/f stream with one-sided PSD amplitude^2 / f. `n` must be a
/// power of two and at least 64.
std::vector<double> pink_noise(std::uint64_t seed, std::size_t n, double sample_period,
                               double amplitude);

/// Spectral-shaping synthesis for any length: random-phase Fourier
/// coefficients with magnitude set so the expected one-sided periodogram
/// equals `one_sided_psd(f)`. The DC bin is zero.
template <typename PsdFn>
std::vector<double> shaped_noise(std::uint64_t seed, std::size_t n, double sample_period,
                                 PsdFn&& one_sided_psd);

/// Exact variance of shaped_noise output for a given PSD (discrete Parseval sum).
template <typename PsdFn>
double shaped_noise_variance(std::size_t n, double sample_period, PsdFn&& one_sided_psd);

/// SNR bookkeeping for the pulse/noise combiner chain.
struct SnrSpec {
  double signal_power_dbm = -14.77;
  double gain_db = 15.5;
  double noise_power_dbm = 0.0;  // RMS in-band noise power
  double bandwidth_hz = 100e6;   // metadata; see noise_rms_for_snr
};

/// 10^((signal + gain - noise)/10).
double snr_linear(const SnrSpec& link);
double snr_db(const SnrSpec& link);

/// Per-quadrature noise RMS whose power ratio against `signal_rms` equals
/// `target_snr`: signal_rms / sqrt(target_snr). `bandwidth_factor` scales the
/// injected noise to account for the simulation bandwidth differing from the
/// measurement bandwidth (1 means the two coincide).
double noise_rms_for_snr(double target_snr, double signal_rms, double bandwidth_factor = 1.0);

/// Inverse of noise_rms_for_snr.
double snr_for_noise_rms(double noise_rms, double signal_rms, double bandwidth_factor = 1.0);

// Seed derivation: every random stream in the library is keyed by a master
// seed and a task path so results do not depend on scheduling order.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace qnl

#include "qnl/noise_impl.hpp"
