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

#include "qnl/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "qnl/clifford.hpp"
#include "qnl/lsq.hpp"
#include "qnl/noise.hpp"

namespace qnl {

namespace {

constexpr std::uint64_t kWhiteStream = 11;
constexpr std::uint64_t kPinkStream = 12;
constexpr std::uint64_t kTraceStream = 21;
constexpr std::uint64_t kRamseyShotStream = 22;

std::size_t trace_length(double duration, double sample_period) {
  if (!(sample_period > 0.0)) throw InvalidInput("sample_period must be positive");
  if (!(duration >= 100.0 * sample_period)) throw InvalidInput("drift duration must cover at least 100 samples");
  return static_cast<std::size_t>(std::llround(duration / sample_period));
}

double pink_unit_variance(std::size_t n, double sample_period) {
  return shaped_noise_variance(n, sample_period, [](double f) { return 1.0 / f; });
}

}  // namespace

const char* to_string(TraceSource source) { return source == TraceSource::kQubit ? "qubit" : "controller"; }

double FrequencyTrace::sample_period() const {
  if (times.size() < 2) throw InvalidInput("trace needs at least two samples");
  return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

void NoiseModel1f::validate() const {
  if (!(white_level >= 0.0) || !(pink_coefficient >= 0.0) || !std::isfinite(white_level) ||
      !std::isfinite(pink_coefficient)) {
    throw InvalidInput("noise model levels must be finite and >= 0");
  }
  if (white_level == 0.0 && pink_coefficient == 0.0) throw InvalidInput("noise model has no white or pink component");
}

NoiseModel1f NoiseModel1f::tuned(double sigma_hz, double corner_hz, double duration, double sample_period) {
  if (!(sigma_hz > 0.0) || !(corner_hz > 0.0)) throw InvalidInput("tuned model needs positive sigma and corner");
  const std::size_t n = trace_length(duration, sample_period);
  const double per_unit = pink_unit_variance(n, sample_period) + 1.0 / (2.0 * sample_period * corner_hz);
  NoiseModel1f model;
  model.pink_coefficient = sigma_hz * sigma_hz / per_unit;
  model.white_level = model.pink_coefficient / corner_hz;
  return model;
}

double drift_variance(const NoiseModel1f& model, double duration, double sample_period) {
  model.validate();
  const std::size_t n = trace_length(duration, sample_period);
  return model.pink_coefficient * pink_unit_variance(n, sample_period) + model.white_level / (2.0 * sample_period);
}

FrequencyTrace synthesize_drift(const NoiseModel1f& model, double duration, double sample_period, std::uint64_t seed,
                                TraceSource source) {
  model.validate();
  const std::size_t n = trace_length(duration, sample_period);
  FrequencyTrace trace;
  trace.source = source;
  trace.times.resize(n);
  trace.frequency_offsets.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) trace.times[k] = static_cast<double>(k) * sample_period;

  if (model.white_level > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, kWhiteStream));
    std::normal_distribution<double> normal(0.0, std::sqrt(model.white_level / (2.0 * sample_period)));
    for (double& x : trace.frequency_offsets) x = normal(rng);
    const double mean = std::accumulate(trace.frequency_offsets.begin(), trace.frequency_offsets.end(), 0.0) /
                        static_cast<double>(n);
    for (double& x : trace.frequency_offsets) x -= mean;
  }
  if (model.pink_coefficient > 0.0) {
    const double c = model.pink_coefficient;
    const auto pink = shaped_noise(derive_seed(seed, kPinkStream), n, sample_period, [c](double f) { return c / f; });
    for (std::size_t k = 0; k < n; ++k) trace.frequency_offsets[k] += pink[k];
  }
  return trace;
}

std::vector<double> simulate_ramsey(std::span<const double> delays, double detuning_hz,
                                    const CoherenceParams& coherence, double frequency_offset_hz) {
  for (std::size_t i = 0; i < delays.size(); ++i) {
    if (!(delays[i] >= 0.0) || !std::isfinite(delays[i])) throw InvalidInput("Ramsey delays must be finite and >= 0");
    if (i > 0 && !(delays[i] > delays[i - 1])) throw InvalidInput("Ramsey delays must be increasing");
  }
  const Liouvillian liouvillian(2, coherence);
  const Operator h_free = carrier_frame_hamiltonian(0.0, 0.0, kTwoPi * (detuning_hz + frequency_offset_hz));
  const SuperOperator generator = liouvillian.generator(h_free);

  const Eigen::Matrix2cd half_pi = pulse_unitary(0.0, 0.5 * kPi);
  Operator rho0 = Operator::Zero(2, 2);
  rho0(0, 0) = 1.0;
  const Operator after_first = half_pi * rho0 * half_pi.adjoint();
  const LiouvilleVector v0 = vectorize<double>(after_first);

  std::vector<double> out;
  out.reserve(delays.size());
  for (double tau : delays) {
    const LiouvilleVector v = (generator * cdouble(tau)).exp() * v0;
    const Operator rho = unvectorize<double>(v, 2);
    const Operator final_rho = half_pi * rho * half_pi.adjoint();
    out.push_back(std::clamp(final_rho(1, 1).real(), 0.0, 1.0));
  }
  return out;
}

RamseyConfig RamseyConfig::uniform(double max_delay, int points, double detuning_hz, const CoherenceParams& coherence,
                                   int shots) {
  if (points < 8 || !(max_delay > 0.0)) throw InvalidInput("Ramsey scan needs >= 8 points and a positive span");
  RamseyConfig cfg;
  cfg.detuning_hz = detuning_hz;
  cfg.coherence = coherence;
  cfg.shots = shots;
  cfg.delays.resize(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) cfg.delays[static_cast<std::size_t>(i)] = max_delay * i / (points - 1);
  return cfg;
}

RamseyFit fit_ramsey_fringe(std::span<const double> delays, std::span<const double> populations, double t2) {
  const std::size_t n = delays.size();
  if (populations.size() != n || n < 8) throw InvalidInput("Ramsey fit needs >= 8 matching samples");
  const double step = (delays[n - 1] - delays[0]) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(delays[i] - delays[i - 1] - step) > 1e-6 * step) throw InvalidInput("Ramsey fit needs uniform delays");
  }
  const double inv_t2 = std::isinf(t2) ? 0.0 : 1.0 / t2;
  auto decay = [&](double t) { return std::exp(-t * inv_t2); };

  RamseyFit out;
  const double f0 = dominant_frequency(populations, step);

  // Linear solve for offset and quadratures at the initial frequency.
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double t = delays[i];
    basis(r, 0) = 1.0;
    basis(r, 1) = decay(t) * std::cos(kTwoPi * f0 * t);
    basis(r, 2) = decay(t) * std::sin(kTwoPi * f0 * t);
    y[r] = populations[i];
  }
  const Eigen::Vector3d lin = basis.colPivHouseholderQr().solve(y);
  const double amp0 = std::hypot(lin[1], lin[2]);
  const double phase0 = std::atan2(-lin[2], lin[1]);

  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double t = delays[i];
      const double e = decay(t);
      const double arg = kTwoPi * x[2] * t + x[3];
      r[row] = x[0] + x[1] * e * std::cos(arg) - populations[i];
      if (jac != nullptr) {
        (*jac)(row, 0) = 1.0;
        (*jac)(row, 1) = e * std::cos(arg);
        (*jac)(row, 2) = -x[1] * e * std::sin(arg) * kTwoPi * t;
        (*jac)(row, 3) = -x[1] * e * std::sin(arg);
      }
    }
  };
  LsqOptions opts;
  opts.relative_tolerance = 1e-13;
  const LsqResult res =
      levenberg_marquardt(residual, Eigen::Vector4d(lin[0], amp0, f0, phase0), static_cast<int>(n), opts);
  out.offset = res.params[0];
  out.amplitude = res.params[1];
  out.frequency_hz = res.params[2];
  out.phase = res.params[3];
  if (out.amplitude < 0.0) {
    out.amplitude = -out.amplitude;
    out.phase += kPi;
  }
  if (out.frequency_hz < 0.0) {
    out.frequency_hz = -out.frequency_hz;
    out.phase = -out.phase;
  }
  out.ok = res.converged && res.covariance_valid && std::isfinite(out.frequency_hz) && out.amplitude > 1e-6;
  if (res.covariance_valid) out.frequency_se = std::sqrt(std::max(0.0, res.covariance(2, 2) * res.reduced_chi_square()));
  return out;
}

TrackingResult track_frequency(const NoiseModel1f& model, double run_duration_hours, const RamseyConfig& ramsey,
                               std::uint64_t seed, TraceSource source) {
  if (!(run_duration_hours >= 1.0)) throw InvalidInput("tracking run must span at least one hour");
  if (ramsey.delays.size() < 8) throw InvalidInput("Ramsey scan needs at least eight delays");
  if (ramsey.shots < 0) throw InvalidInput("Ramsey shots must be >= 0");

  TrackingResult result;
  result.truth = synthesize_drift(model, run_duration_hours * 3600.0, ramsey.estimate_interval,
                                  derive_seed(seed, kTraceStream), source);
  result.estimate.source = source;
  result.estimate.times = result.truth.times;
  result.estimate.frequency_offsets.resize(result.truth.size());

  const double t2 = ramsey.coherence.t2();
  const double sign = ramsey.detuning_hz >= 0.0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < result.truth.size(); ++k) {
    std::vector<double> pops =
        simulate_ramsey(ramsey.delays, ramsey.detuning_hz, ramsey.coherence, result.truth.frequency_offsets[k]);
    if (ramsey.shots > 0) {
      std::mt19937_64 rng(derive_seed(seed, kRamseyShotStream, k));
      for (double& p : pops) {
        std::binomial_distribution<int> draw(ramsey.shots, p);
        p = static_cast<double>(draw(rng)) / ramsey.shots;
      }
    }
    double estimate = std::numeric_limits<double>::quiet_NaN();
    try {
      const RamseyFit fit = fit_ramsey_fringe(ramsey.delays, pops, t2);
      if (fit.ok) estimate = sign * fit.frequency_hz - ramsey.detuning_hz;
    } catch (const QnlError&) {
    }
    if (std::isnan(estimate)) result.gaps.push_back(k);
    result.estimate.frequency_offsets[k] = estimate;
  }
  return result;
}

double drift_sigma(const FrequencyTrace& trace) {
  std::vector<double> v;
  v.reserve(trace.size());
  for (double x : trace.frequency_offsets) {
    if (std::isfinite(x)) v.push_back(x);
  }
  if (v.size() < 100) throw InvalidInput("drift_sigma needs at least 100 samples");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

PsdModelFit fit_psd_model(const PsdEstimate& psd, double f_min, double f_max, bool free_slope) {
  std::vector<double> f, s;
  for (std::size_t i = 0; i < psd.frequencies.size(); ++i) {
    if (psd.frequencies[i] >= f_min && psd.frequencies[i] <= f_max && psd.power[i] > 0.0) {
      f.push_back(psd.frequencies[i]);
      s.push_back(psd.power[i]);
    }
  }
  const std::size_t n_params = free_slope ? 3 : 2;
  if (f.size() < n_params + 2) throw InvalidInput("fit_psd_model: too few PSD points in band");
  const std::size_t n = f.size();

  // Initial guess: pink level from the lowest bins, white level from the highest.
  const std::size_t k = std::max<std::size_t>(1, n / 10);
  double c0 = 0.0, w0 = 0.0;
  for (std::size_t i = 0; i < k; ++i) c0 += s[i] * f[i] / static_cast<double>(k);
  for (std::size_t i = n - k; i < n; ++i) w0 += s[i] / static_cast<double>(k);
  w0 = std::max(w0 - c0 / f[n - 1], 1e-3 * w0);

  // Pink term is c (f/f_ref)^slope with f_ref the geometric band centre, which
  // keeps c and slope roughly uncorrelated.
  const double f_ref = std::sqrt(f.front() * f.back());
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double c = std::exp(x[0]);
    const double w = std::exp(x[1]);
    const double slope = free_slope ? x[2] : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double lx = std::log(f[i] / f_ref);
      const double pink = c * std::exp(slope * lx);
      const double model = pink + w;
      r[row] = std::log(model) - std::log(s[i]);
      if (jac != nullptr) {
        (*jac)(row, 0) = pink / model;
        (*jac)(row, 1) = w / model;
        if (free_slope) (*jac)(row, 2) = pink * lx / model;
      }
    }
  };
  Eigen::VectorXd x0(static_cast<Eigen::Index>(n_params));
  x0[0] = std::log(c0 / f_ref);
  x0[1] = std::log(w0);
  if (free_slope) x0[2] = -1.0;
  const LsqResult res = levenberg_marquardt(residual, x0, static_cast<int>(n));
  if (!res.converged) throw FitFailure("PSD model fit did not converge: " + res.message);

  PsdModelFit out;
  out.white_level = std::exp(res.params[1]);
  out.slope = free_slope ? res.params[2] : -1.0;
  out.pink_coefficient = std::exp(res.params[0]) * std::pow(f_ref, -out.slope);
  if (free_slope && res.covariance_valid) {
    out.slope_se = std::sqrt(std::max(0.0, res.covariance(2, 2) * res.reduced_chi_square()));
  }
  return out;
}

std::vector<DetuningPoint> fidelity_vs_detuning(std::span<const double> offsets_hz, const RbConfig& config) {
  std::vector<DetuningPoint> out;
  out.reserve(offsets_hz.size());
  for (double offset : offsets_hz) {
    RbConfig cfg = config;
    cfg.detuning = kTwoPi * offset;
    const RbResult rb = run_rb(cfg);
    out.push_back({offset, rb.fidelity, rb.fidelity_se});
  }
  return out;
}

}  // namespace qnl
