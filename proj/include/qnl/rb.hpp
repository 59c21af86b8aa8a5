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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnl/clifford.hpp"
#include "qnl/dynamics.hpp"
#include "qnl/pulse.hpp"

namespace qnl {

/// Shape of the calibrated pi/2 pulse. A pi rotation is two of these back to back.
struct GatePulseConfig {
  EnvelopeShape shape = EnvelopeShape::kGaussian;
  double duration = 20e-9;        // s, per pi/2
  double sample_period = 0.5e-9;  // s
};

struct RbConfig {
  std::vector<int> lengths{2, 4, 8, 16, 32, 64, 128, 256};
  int n_sequences = 30;
  int shots = 1000;
  CoherenceParams coherence = CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6);
  GatePulseConfig pulse;
  LevelModel levels;
  double detuning = 0.0;            // rad/s, fixed drive detuning
  std::optional<double> snr;        // linear SNR of the injected white noise
  double noise_bandwidth_factor = 1.0;
  double readout_error = 0.0;       // symmetric assignment error probability
  std::uint64_t seed = 1;
  int jobs = 1;
};

/// One random Clifford sequence plus the recovery element that undoes it.
struct RBSequence {
  std::uint64_t seed = 0;
  std::vector<int> elements;
  int recovery = 0;

  std::size_t length() const { return elements.size(); }
};

struct RbFit {
  double a = 0.0;
  double b = 0.0;
  double p = 1.0;
  double a_se = 0.0;
  double b_se = 0.0;
  double p_se = 0.0;
  double reduced_chi_square = 0.0;
  int iterations = 0;
};

struct RbResult {
  std::vector<int> lengths;
  std::vector<double> mean_survival;
  std::vector<double> sem_survival;
  std::vector<std::vector<double>> survivals;  // [length][sequence]
  int shots = 0;
  RbFit fit;
  bool fit_ok = false;
  std::string fit_message;  // diagnostics when fit_ok is false
  double fidelity = 1.0;
  double fidelity_se = 0.0;
  double gate_duration = 0.0;  // pi/2 duration used
};

RBSequence random_sequence(int m, std::uint64_t seed);

/// Pulse train for a sequence (recovery included), starting at frame phase 0.
/// Every pi/2 slot shares one Rabi scale; identity elements contribute nothing.
PulseSchedule sequence_schedule(const std::vector<int>& cliffords, const GatePulseConfig& pulse,
                                double detuning = 0.0);

/// Envelope RMS of the reference pi/2 pulse: the signal level SNR is quoted against.
double reference_signal_rms(const GatePulseConfig& pulse);

RbResult run_rb(const RbConfig& config);

/// Fits P(m) = a p^m + b with 0 < p <= 1 and 0 <= b <= 1. `sem` (optional)
/// supplies per-length standard errors used as weights.
RbFit fit_rb_decay(std::span<const int> lengths, std::span<const double> survivals,
                   std::span<const double> sem = {});

/// Average gate fidelity from the depolarizing parameter, d = 2.
double fidelity_from_p(double p);

/// Channel-averaged error per Clifford, 1 - mean F_avg(channel, ideal), of the
/// noise-free pulse library for `config`. Independent of shots and sequences.
double clifford_average_error(const RbConfig& config);

struct DurationCalibration {
  std::vector<double> durations;          // s, per pi/2
  std::vector<double> error_per_clifford;
  double slope = 0.0;                     // error per second of pi/2 duration, fit through origin
  double max_linearity_deviation = 0.0;   // max |err/(slope*dur) - 1|
  bool monotone = false;
  double target_error = 0.0;
  double calibrated_duration = 0.0;       // rounded to the sample grid
};

/// Sweeps the pi/2 duration and picks the one whose channel-averaged
/// Clifford error matches 1 - target_fidelity.
DurationCalibration calibrate_gate_duration(double target_fidelity, const RbConfig& base,
                                            const std::vector<double>& durations);

}  // namespace qnl
