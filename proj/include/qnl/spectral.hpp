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

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qnl/types.hpp"

namespace qnl {

bool is_power_of_two(std::size_t n);

/// Welch power spectral density estimate, one-sided, DC excluded.
struct PsdEstimate {
  std::vector<double> frequencies;  // Hz
  std::vector<double> power;        // units^2 / Hz
  std::size_t segment_length = 0;
  double overlap_fraction = 0.0;
  std::string window = "hann";

  double resolution() const { return frequencies.empty() ? 0.0 : frequencies.front(); }
};

/// Hann-windowed, mean-removed, overlapped and averaged periodogram.
/// `segment_length` must be a power of two no larger than the input.
PsdEstimate welch_psd(std::span<const double> samples, double sample_period,
                      std::size_t segment_length, double overlap_fraction);

/// Defaults: segment = largest power of two <= n/8 (at least 16), 50% overlap.
PsdEstimate welch_psd(std::span<const double> samples, double sample_period);

std::size_t default_welch_segment(std::size_t n);

/// Rectangle-rule integral of the PSD over [f_min, f_max].
double integrate_psd(const PsdEstimate& psd, double f_min = 0.0,
                     double f_max = std::numeric_limits<double>::infinity());

struct PowerLawFit {
  double slope = 0.0;       // d log10(PSD) / d log10(f)
  double intercept = 0.0;   // log10(PSD) at f = 1 Hz
  std::size_t points = 0;
};

/// Ordinary least squares of log10 PSD against log10 f over [f_min, f_max].
PowerLawFit loglog_slope(const PsdEstimate& psd, double f_min, double f_max);

/// Band spanning `decades` decades centred (geometrically) on the estimate's
/// usable frequency range.
std::pair<double, double> central_band(const PsdEstimate& psd, double decades);

/// Frequency of the largest zero-padded DFT magnitude of `y - mean(y)`, refined
/// by parabolic interpolation on the log magnitude. Assumes uniform sampling.
double dominant_frequency(std::span<const double> y, double sample_period, std::size_t pad_factor = 16);

}  // namespace qnl
