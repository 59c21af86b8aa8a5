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

#include "qnl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <unsupported/Eigen/FFT>

namespace qnl {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t default_welch_segment(std::size_t n) {
  std::size_t seg = 16;
  while (seg * 2 <= n / 8) seg *= 2;
  return std::min(seg, n);
}

PsdEstimate welch_psd(std::span<const double> samples, double sample_period, std::size_t segment_length,
                      double overlap_fraction) {
  const std::size_t n = samples.size();
  if (!is_power_of_two(segment_length) || segment_length < 4) {
    throw InvalidInput("welch_psd: segment length must be a power of two >= 4");
  }
  if (n < segment_length) throw InvalidInput("welch_psd: fewer samples than one segment");
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 0.9)) throw InvalidInput("welch_psd: overlap must be in [0, 0.9]");
  if (!(sample_period > 0.0)) throw InvalidInput("welch_psd: sample_period must be positive");

  const std::size_t seg = segment_length;
  const std::size_t step =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(seg) * (1.0 - overlap_fraction))));
  const std::size_t n_segments = 1 + (n - seg) / step;

  std::vector<double> window(seg);
  double window_power = 0.0;
  for (std::size_t k = 0; k < seg; ++k) {
    window[k] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(seg)));
    window_power += window[k] * window[k];
  }

  Eigen::FFT<double> fft;
  std::vector<double> buffer(seg);
  std::vector<std::complex<double>> spectrum;
  std::vector<double> accum(seg / 2 + 1, 0.0);
  for (std::size_t s = 0; s < n_segments; ++s) {
    const auto first = samples.begin() + static_cast<std::ptrdiff_t>(s * step);
    const double mean = std::accumulate(first, first + static_cast<std::ptrdiff_t>(seg), 0.0) / static_cast<double>(seg);
    for (std::size_t k = 0; k < seg; ++k) buffer[k] = (first[static_cast<std::ptrdiff_t>(k)] - mean) * window[k];
    fft.fwd(spectrum, buffer);
    for (std::size_t k = 0; k <= seg / 2; ++k) accum[k] += std::norm(spectrum[k]);
  }

  PsdEstimate out;
  out.segment_length = seg;
  out.overlap_fraction = overlap_fraction;
  const double scale = sample_period / (window_power * static_cast<double>(n_segments));
  const double df = 1.0 / (static_cast<double>(seg) * sample_period);
  for (std::size_t k = 1; k <= seg / 2; ++k) {
    const double one_sided = (2 * k == seg) ? 1.0 : 2.0;
    out.frequencies.push_back(static_cast<double>(k) * df);
    out.power.push_back(one_sided * scale * accum[k]);
  }
  return out;
}

PsdEstimate welch_psd(std::span<const double> samples, double sample_period) {
  return welch_psd(samples, sample_period, default_welch_segment(samples.size()), 0.5);
}

double integrate_psd(const PsdEstimate& psd, double f_min, double f_max) {
  const double df = psd.resolution();
  double total = 0.0;
  for (std::size_t i = 0; i < psd.frequencies.size(); ++i) {
    if (psd.frequencies[i] >= f_min && psd.frequencies[i] <= f_max) total += psd.power[i] * df;
  }
  return total;
}

PowerLawFit loglog_slope(const PsdEstimate& psd, double f_min, double f_max) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < psd.frequencies.size(); ++i) {
    const double f = psd.frequencies[i];
    if (f < f_min || f > f_max || !(psd.power[i] > 0.0)) continue;
    const double x = std::log10(f);
    const double y = std::log10(psd.power[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 3) throw InvalidInput("loglog_slope: fewer than three positive PSD points in band");
  const double nd = static_cast<double>(n);
  const double denom = nd * sxx - sx * sx;
  PowerLawFit fit;
  fit.slope = (nd * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / nd;
  fit.points = n;
  return fit;
}

std::pair<double, double> central_band(const PsdEstimate& psd, double decades) {
  if (psd.frequencies.empty()) throw InvalidInput("central_band: empty PSD");
  const double lo = psd.frequencies.front();
  const double hi = psd.frequencies.back();
  const double centre = std::sqrt(lo * hi);
  const double half = std::pow(10.0, 0.5 * decades);
  return {std::max(lo, centre / half), std::min(hi, centre * half)};
}

double dominant_frequency(std::span<const double> y, double sample_period, std::size_t pad_factor) {
  const std::size_t n = y.size();
  if (n < 4) throw InvalidInput("dominant_frequency: need at least four samples");
  std::size_t padded = 1;
  while (padded < n) padded *= 2;
  padded *= std::max<std::size_t>(1, pad_factor);

  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> buffer(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) buffer[i] = y[i] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, buffer);

  std::size_t best = 1;
  for (std::size_t k = 1; k < padded / 2; ++k) {
    if (std::abs(spectrum[k]) > std::abs(spectrum[best])) best = k;
  }
  double shift = 0.0;
  if (best > 1 && best + 1 < padded / 2) {
    const double a = std::log(std::abs(spectrum[best - 1]) + 1e-300);
    const double b = std::log(std::abs(spectrum[best]) + 1e-300);
    const double c = std::log(std::abs(spectrum[best + 1]) + 1e-300);
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) shift = 0.5 * (a - c) / denom;
  }
  return (static_cast<double>(best) + shift) / (static_cast<double>(padded) * sample_period);
}

}  // namespace qnl
