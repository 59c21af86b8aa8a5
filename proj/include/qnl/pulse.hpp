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

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qnl/types.hpp"

namespace qnl {

enum class EnvelopeShape { kSquare, kGaussian, kCosine };

/// A run of samples sharing one drive phase. Virtual-Z frame updates show up
/// as phase jumps between segments.
struct PulseSegment {
  std::size_t first = 0;
  std::size_t count = 0;
  double phase = 0.0;
};

/// Sampled complex baseband envelope V(t) e^{i phi}, peak-normalized so that
/// |sample| <= 1 and `rabi_scale` maps unit amplitude to Omega_R.
struct PulseSchedule {
  std::vector<cdouble> samples;
  double sample_period = 0.0;  // s
  double rabi_scale = 0.0;     // rad/s
  double detuning = 0.0;       // rad/s
  std::vector<PulseSegment> segments;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) * sample_period; }

  /// 2 Omega_R sum |V| dt: the rotation angle of the whole schedule when all
  /// samples share one axis.
  double rotation_angle() const;

  /// RMS of |samples|.
  double rms_amplitude() const;

  /// Appends `other` rotated by `phase_shift`. Periods and Rabi scales must
  /// agree; an empty schedule adopts those of `other`.
  void append(const PulseSchedule& other, double phase_shift = 0.0);
};

/// Peak-normalized envelope of the given shape whose rotation angle is `area`.
/// Gaussians are truncated at +-2 sigma (sigma = duration / 4).
PulseSchedule make_envelope(EnvelopeShape shape, double duration, double area, double sample_period,
                            double phase = 0.0);

/// Same envelope scaled to a fixed Rabi scale instead of peak normalization.
/// Used to build pulse trains where every pulse shares one Omega_R.
PulseSchedule make_envelope_with_rabi(EnvelopeShape shape, double duration, double area,
                                      double sample_period, double rabi_scale, double phase = 0.0);

const char* to_string(EnvelopeShape shape);
EnvelopeShape envelope_shape_from_string(const std::string& name);

}  // namespace qnl
