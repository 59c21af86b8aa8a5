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
#include <span>
#include <string>
#include <vector>

#include "qnl/dynamics.hpp"
#include "qnl/rb.hpp"
#include "qnl/spectral.hpp"

namespace qnl {

enum class TraceSource { kQubit, kController };

const char* to_string(TraceSource source);

struct FrequencyTrace {
  std::vector<double> times;              // s
  std::vector<double> frequency_offsets;  // Hz, relative to nominal
  TraceSource source = TraceSource::kQubit;

  std::size_t size() const { return times.size(); }
  double sample_period() const;
};

/// One-sided PSD of frequency fluctuations: pink_coefficient / f + white_level.
struct NoiseModel1f {
  double white_level = 0.0;       // Hz^2 / Hz
  double pink_coefficient = 0.0;  // Hz^2

  double psd(double f) const { return pink_coefficient / f + white_level; }
  /// Frequency where the pink and white contributions are equal.
  double corner_frequency() const { return pink_coefficient / white_level; }
  void validate() const;

  /// Model whose synthesized trace of `duration` at `sample_period` has
  /// standard deviation `sigma_hz`, with the pink/white corner at `corner_hz`.
  static NoiseModel1f tuned(double sigma_hz, double corner_hz, double duration, double sample_period);
};

/// Expected variance of a synthesize_drift trace.
double drift_variance(const NoiseModel1f& model, double duration, double sample_period);

/// White stream (variance white_level / (2 dt)) plus a spectrally shaped 1/f
/// stream with PSD pink_coefficient / f.
FrequencyTrace synthesize_drift(const NoiseModel1f& model, double duration, double sample_period,
                                std::uint64_t seed, TraceSource source = TraceSource::kQubit);

/// Ideal-pulse Ramsey: excited population after pi/2 - free evolution at
/// (detuning + offset) under T1/T2 - pi/2, for each delay.
std::vector<double> simulate_ramsey(std::span<const double> delays, double detuning_hz,
                                    const CoherenceParams& coherence, double frequency_offset_hz);

struct RamseyConfig {
  std::vector<double> delays;       // s
  double detuning_hz = 1e6;
  CoherenceParams coherence = CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6);
  int shots = 100;                  // 0 = exact probabilities
  double estimate_interval = 30.0;  // s of trace time between Ramsey scans

  /// `points` delays evenly spaced over [0, max_delay].
  static RamseyConfig uniform(double max_delay, int points, double detuning_hz,
                              const CoherenceParams& coherence, int shots);
};

/// Decaying-cosine fit a + c exp(-t/T2) cos(2 pi f t + phi); T2 fixed.
struct RamseyFit {
  double frequency_hz = 0.0;
  double phase = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double frequency_se = 0.0;
  bool ok = false;
};

RamseyFit fit_ramsey_fringe(std::span<const double> delays, std::span<const double> populations, double t2);

struct TrackingResult {
  FrequencyTrace truth;
  FrequencyTrace estimate;       // NaN at gaps
  std::vector<std::size_t> gaps; // indices where the fringe fit failed
};

/// Synthesizes `run_duration_hours` of drift and re-estimates it from one
/// simulated Ramsey scan per `ramsey.estimate_interval` (drift frozen per scan).
TrackingResult track_frequency(const NoiseModel1f& model, double run_duration_hours,
                               const RamseyConfig& ramsey, std::uint64_t seed,
                               TraceSource source = TraceSource::kQubit);

/// Sample standard deviation of the offsets (NaN entries skipped).
double drift_sigma(const FrequencyTrace& trace);

struct PsdModelFit {
  double white_level = 0.0;
  double pink_coefficient = 0.0;  // PSD of the pink part at 1 Hz
  double slope = -1.0;            // pink log-log slope
  double slope_se = 0.0;          // only set when the slope is fitted
};

/// Least-squares fit of log PSD to log(c f^slope + w) over [f_min, f_max].
/// The slope is pinned at -1 unless `free_slope`.
PsdModelFit fit_psd_model(const PsdEstimate& psd, double f_min, double f_max, bool free_slope = false);

struct DetuningPoint {
  double offset_hz = 0.0;
  double fidelity = 0.0;
  double fidelity_se = 0.0;
};

/// run_rb at a fixed drive detuning per offset. Seeds are shared across
/// offsets so differences reflect the detuning, not resampling.
std::vector<DetuningPoint> fidelity_vs_detuning(std::span<const double> offsets_hz, const RbConfig& config);

}  // namespace qnl
