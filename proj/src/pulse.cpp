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

#include "qnl/pulse.hpp"

#include <algorithm>
#include <cmath>

namespace qnl {

namespace {

std::vector<double> unit_envelope(EnvelopeShape shape, std::size_t n, double sample_period) {
  const double duration = static_cast<double>(n) * sample_period;
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * sample_period;
    switch (shape) {
      case EnvelopeShape::kSquare:
        v[k] = 1.0;
        break;
      case EnvelopeShape::kGaussian: {
        const double sigma = duration / 4.0;
        const double x = (t - 0.5 * duration) / sigma;
        v[k] = std::exp(-0.5 * x * x);
        break;
      }
      case EnvelopeShape::kCosine:
        v[k] = 0.5 * (1.0 - std::cos(kTwoPi * t / duration));
        break;
    }
  }
  const double peak = *std::max_element(v.begin(), v.end());
  for (double& x : v) x /= peak;
  return v;
}

std::size_t sample_count(double duration, double sample_period) {
  if (!(sample_period > 0.0) || !std::isfinite(sample_period)) throw InvalidInput("sample_period must be positive");
  if (!(duration >= 2.0 * sample_period * (1.0 - 1e-9))) {
    throw InvalidInput("pulse duration must cover at least two samples");
  }
  return static_cast<std::size_t>(std::llround(duration / sample_period));
}

PulseSchedule build(const std::vector<double>& unit, double sample_period, double rabi_scale, double scale,
                    double phase) {
  PulseSchedule s;
  s.sample_period = sample_period;
  s.rabi_scale = rabi_scale;
  s.samples.resize(unit.size());
  const cdouble rot = std::polar(1.0, phase);
  for (std::size_t k = 0; k < unit.size(); ++k) s.samples[k] = scale * unit[k] * rot;
  s.segments.push_back({0, unit.size(), phase});
  return s;
}

}  // namespace

double PulseSchedule::rotation_angle() const {
  double sum = 0.0;
  for (const auto& z : samples) sum += std::abs(z);
  return 2.0 * rabi_scale * sum * sample_period;
}

double PulseSchedule::rms_amplitude() const {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& z : samples) sum += std::norm(z);
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

void PulseSchedule::append(const PulseSchedule& other, double phase_shift) {
  if (other.samples.empty()) return;
  if (samples.empty() && segments.empty()) {
    sample_period = other.sample_period;
    rabi_scale = other.rabi_scale;
    detuning = other.detuning;
  } else if (std::abs(sample_period - other.sample_period) > 1e-12 * sample_period ||
             std::abs(rabi_scale - other.rabi_scale) > 1e-12 * std::max(1.0, rabi_scale)) {
    throw InvalidInput("cannot append schedules with different sample periods or Rabi scales");
  }
  const std::size_t base = samples.size();
  const cdouble rot = std::polar(1.0, phase_shift);
  for (const auto& z : other.samples) samples.push_back(z * rot);
  for (const auto& seg : other.segments) segments.push_back({base + seg.first, seg.count, seg.phase + phase_shift});
}

PulseSchedule make_envelope(EnvelopeShape shape, double duration, double area, double sample_period, double phase) {
  const std::size_t n = sample_count(duration, sample_period);
  if (!(area >= 0.0) || !std::isfinite(area)) throw InvalidInput("pulse area must be finite and >= 0");
  const auto unit = unit_envelope(shape, n, sample_period);
  if (area == 0.0) return build(unit, sample_period, 0.0, 0.0, phase);
  double integral = 0.0;
  for (double x : unit) integral += x * sample_period;
  return build(unit, sample_period, area / (2.0 * integral), 1.0, phase);
}

PulseSchedule make_envelope_with_rabi(EnvelopeShape shape, double duration, double area, double sample_period,
                                      double rabi_scale, double phase) {
  const std::size_t n = sample_count(duration, sample_period);
  if (!(area >= 0.0) || !std::isfinite(area)) throw InvalidInput("pulse area must be finite and >= 0");
  if (!(rabi_scale > 0.0)) throw InvalidInput("rabi_scale must be positive");
  const auto unit = unit_envelope(shape, n, sample_period);
  double integral = 0.0;
  for (double x : unit) integral += x * sample_period;
  const double scale = area / (2.0 * rabi_scale * integral);
  if (scale > 1.0 + 1e-12) throw InvalidInput("requested area exceeds the peak-normalized envelope at this Rabi scale");
  return build(unit, sample_period, rabi_scale, scale, phase);
}

const char* to_string(EnvelopeShape shape) {
  switch (shape) {
    case EnvelopeShape::kSquare: return "square";
    case EnvelopeShape::kGaussian: return "gaussian";
    case EnvelopeShape::kCosine: return "cosine";
  }
  return "unknown";
}

EnvelopeShape envelope_shape_from_string(const std::string& name) {
  if (name == "square") return EnvelopeShape::kSquare;
  if (name == "gaussian") return EnvelopeShape::kGaussian;
  if (name == "cosine") return EnvelopeShape::kCosine;
  throw InvalidInput("unknown envelope shape '" + name + "'");
}

}  // namespace qnl
