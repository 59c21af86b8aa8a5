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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qnl/drift.hpp"
#include "qnl/noise.hpp"
#include "qnl/spectral.hpp"

namespace qnl {
namespace {

std::vector<double> gaussian_samples(std::uint64_t seed, std::size_t n, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

// Exact fringe for ideal pulses: T1 only moves population between the
// levels, so it drops out of the second pulse's projection.
double ramsey_oracle(double t, double detuning_hz, double t2) {
  return 0.5 * (1.0 + std::exp(-t / t2) * std::cos(kTwoPi * detuning_hz * t));
}

TEST(Welch, WhiteNoiseIsFlatAtTwoSigmaSquaredDt) {
  const double dt = 1e-3, sigma = 2.0;
  const auto x = gaussian_samples(5, 1 << 16, sigma);
  const PsdEstimate psd = welch_psd(x, dt, 1024, 0.5);
  EXPECT_EQ(psd.frequencies.size(), 512u);
  EXPECT_NEAR(psd.resolution(), 1.0 / (1024 * dt), 1e-12);
  double mean = 0.0;
  for (double p : psd.power) mean += p / static_cast<double>(psd.power.size());
  EXPECT_NEAR(mean, 2.0 * sigma * sigma * dt, 0.02 * 2.0 * sigma * sigma * dt);
  EXPECT_NEAR(integrate_psd(psd), sigma * sigma, 0.03 * sigma * sigma);
  EXPECT_NEAR(loglog_slope(psd, 1.0, 400.0).slope, 0.0, 0.05);
}

TEST(Welch, SinusoidPowerLandsInItsBin) {
  const double dt = 1e-3, f0 = 125.0, amp = 3.0;
  std::vector<double> x(1 << 14);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = amp * std::sin(kTwoPi * f0 * k * dt);
  const PsdEstimate psd = welch_psd(x, dt, 1024, 0.5);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < psd.power.size(); ++i) {
    if (psd.power[i] > psd.power[peak]) peak = i;
  }
  EXPECT_NEAR(psd.frequencies[peak], f0, 1e-9);
  EXPECT_NEAR(integrate_psd(psd, f0 - 5.0, f0 + 5.0), amp * amp / 2.0, 1e-6);
}

TEST(Welch, RejectsBadArguments) {
  const std::vector<double> x(100, 1.0);
  EXPECT_THROW(welch_psd(x, 1.0, 48, 0.5), InvalidInput);
  EXPECT_THROW(welch_psd(x, 1.0, 128, 0.5), InvalidInput);
  EXPECT_THROW(welch_psd(x, 1.0, 32, 0.95), InvalidInput);
  EXPECT_THROW(welch_psd(x, 0.0, 32, 0.5), InvalidInput);
  EXPECT_TRUE(is_power_of_two(64));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_EQ(default_welch_segment(1 << 12), 512u);
}

TEST(LoglogSlope, ExactPowerLaw) {
  PsdEstimate psd;
  for (int k = 1; k <= 100; ++k) {
    psd.frequencies.push_back(0.1 * k);
    psd.power.push_back(7.0 * std::pow(0.1 * k, -1.3));
  }
  const PowerLawFit fit = loglog_slope(psd, 0.0, 100.0);
  EXPECT_NEAR(fit.slope, -1.3, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log10(7.0), 1e-12);
  EXPECT_EQ(fit.points, 100u);
  EXPECT_THROW(loglog_slope(psd, 50.0, 60.0), InvalidInput);
}

TEST(DominantFrequency, AgreesWithDirectDft) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> freq(0.05, 0.4), phase(0.0, kTwoPi);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 64;
    const double dt = 1.0, f = freq(rng), ph = phase(rng);
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) y[k] = 0.3 + std::exp(-0.01 * k) * std::cos(kTwoPi * f * k + ph);
    const double expected = oracle::dft_peak_frequency(y, dt, 0.02, 0.48);
    EXPECT_NEAR(dominant_frequency(y, dt), expected, 2e-3 / (n * dt)) << "f=" << f;
  }
}

TEST(NoiseModel1f, ValidationAndCorner) {
  EXPECT_THROW((NoiseModel1f{0.0, 0.0}.validate()), InvalidInput);
  EXPECT_THROW((NoiseModel1f{-1.0, 1.0}.validate()), InvalidInput);
  EXPECT_THROW((NoiseModel1f{1.0, std::nan("")}.validate()), InvalidInput);
  const NoiseModel1f m{2.0, 0.5};
  EXPECT_DOUBLE_EQ(m.corner_frequency(), 0.25);
  EXPECT_DOUBLE_EQ(m.psd(m.corner_frequency()), 2.0 * m.white_level);
}

TEST(NoiseModel1f, TunedModelHitsSigmaAndCorner) {
  const NoiseModel1f m = NoiseModel1f::tuned(5000.0, 0.01, 20 * 3600.0, 30.0);
  EXPECT_NEAR(std::sqrt(drift_variance(m, 20 * 3600.0, 30.0)), 5000.0, 1e-6);
  EXPECT_NEAR(m.corner_frequency(), 0.01, 1e-15);
  EXPECT_THROW(NoiseModel1f::tuned(0.0, 0.01, 3600.0, 1.0), InvalidInput);
  EXPECT_THROW(NoiseModel1f::tuned(1.0, 0.01, 50.0, 1.0), InvalidInput);
}

TEST(SynthesizeDrift, EnsembleVarianceMatchesPrediction) {
  const NoiseModel1f m{1e-3, 2e-2};
  const double duration = 4096.0, dt = 1.0;
  double mean_var = 0.0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    const FrequencyTrace t = synthesize_drift(m, duration, dt, 100 + s);
    const double sd = drift_sigma(t);
    mean_var += sd * sd / seeds;
  }
  EXPECT_NEAR(mean_var, drift_variance(m, duration, dt), 0.05 * drift_variance(m, duration, dt));
}

TEST(SynthesizeDrift, GridDeterminismAndSource) {
  const NoiseModel1f m{1.0, 1.0};
  const FrequencyTrace a = synthesize_drift(m, 1000.0, 2.0, 9, TraceSource::kController);
  const FrequencyTrace b = synthesize_drift(m, 1000.0, 2.0, 9, TraceSource::kController);
  ASSERT_EQ(a.size(), 500u);
  EXPECT_EQ(a.frequency_offsets, b.frequency_offsets);
  EXPECT_DOUBLE_EQ(a.times[499], 998.0);
  EXPECT_DOUBLE_EQ(a.sample_period(), 2.0);
  EXPECT_EQ(a.source, TraceSource::kController);
  EXPECT_STREQ(to_string(a.source), "controller");
  EXPECT_NE(a.frequency_offsets, synthesize_drift(m, 1000.0, 2.0, 10).frequency_offsets);
}

TEST(FitPsdModel, RecoversLevelsAndSlope) {
  const NoiseModel1f truth{4.0, 0.2};  // corner at 0.05 Hz
  const double dt = 1.0;
  const FrequencyTrace t = synthesize_drift(truth, 1 << 17, dt, 21);
  const PsdEstimate psd = welch_psd(t.frequency_offsets, dt, 8192, 0.5);
  const PsdModelFit pinned = fit_psd_model(psd, 1e-3, 0.5);
  EXPECT_NEAR(pinned.white_level, truth.white_level, 0.1 * truth.white_level);
  EXPECT_NEAR(pinned.pink_coefficient, truth.pink_coefficient, 0.2 * truth.pink_coefficient);
  EXPECT_DOUBLE_EQ(pinned.slope, -1.0);
  const PsdModelFit free = fit_psd_model(psd, 1e-3, 0.5, true);
  EXPECT_NEAR(free.slope, -1.0, 0.15);
  EXPECT_GT(free.slope_se, 0.0);
  EXPECT_THROW(fit_psd_model(psd, 0.4, 0.4001), InvalidInput);
}

TEST(DriftSigma, SkipsGaps) {
  std::vector<double> v = gaussian_samples(3, 400, 2.0);
  FrequencyTrace t;
  t.frequency_offsets = v;
  t.times.resize(v.size());
  const double full = drift_sigma(t);
  t.frequency_offsets.push_back(std::nan(""));
  t.times.push_back(400.0);
  EXPECT_DOUBLE_EQ(drift_sigma(t), full);
  t.frequency_offsets.resize(50);
  EXPECT_THROW(drift_sigma(t), InvalidInput);
}

TEST(Ramsey, SimulationMatchesClosedForm) {
  const auto coh = CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6);
  const RamseyConfig cfg = RamseyConfig::uniform(20e-6, 64, 1e6, coh, 0);
  for (double offset : {0.0, 4.2e3, -7.7e3}) {
    const auto p = simulate_ramsey(cfg.delays, cfg.detuning_hz, coh, offset);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(p[i], ramsey_oracle(cfg.delays[i], cfg.detuning_hz + offset, coh.t2()), 1e-9);
    }
  }
  const std::vector<double> bad{0.0, 2e-6, 1e-6};
  EXPECT_THROW(simulate_ramsey(bad, 1e6, coh, 0.0), InvalidInput);
}

TEST(Ramsey, FringeFitIsExactOnCleanData) {
  const auto coh = CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6);
  const RamseyConfig cfg = RamseyConfig::uniform(20e-6, 64, 1e6, coh, 0);
  const auto p = simulate_ramsey(cfg.delays, cfg.detuning_hz, coh, 3.3e3);
  const RamseyFit fit = fit_ramsey_fringe(cfg.delays, p, coh.t2());
  ASSERT_TRUE(fit.ok);
  EXPECT_NEAR(fit.frequency_hz, 1.0033e6, 1e-3);
  EXPECT_NEAR(fit.amplitude, 0.5, 1e-9);
  EXPECT_NEAR(fit.offset, 0.5, 1e-9);
  std::vector<double> uneven = cfg.delays;
  uneven[3] += 1e-8;
  EXPECT_THROW(fit_ramsey_fringe(uneven, p, coh.t2()), InvalidInput);
}

TEST(Ramsey, ShotNoiseErrorBarIsHonest) {
  const auto coh = CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6);
  const RamseyConfig cfg = RamseyConfig::uniform(20e-6, 64, 1e6, coh, 100);
  const auto exact = simulate_ramsey(cfg.delays, cfg.detuning_hz, coh, 0.0);
  std::mt19937_64 rng(77);
  int covered = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> p = exact;
    for (double& x : p) x = std::binomial_distribution<int>(100, x)(rng) / 100.0;
    const RamseyFit fit = fit_ramsey_fringe(cfg.delays, p, coh.t2());
    ASSERT_TRUE(fit.ok);
    if (std::abs(fit.frequency_hz - 1e6) < 2.0 * fit.frequency_se) ++covered;
  }
  EXPECT_GT(covered, static_cast<int>(0.9 * trials));
}

TEST(TrackFrequency, ExactProbabilitiesRecoverTruth) {
  const NoiseModel1f qubit = NoiseModel1f::tuned(5000.0, 0.01, 3 * 3600.0, 30.0);
  const RamseyConfig cfg =
      RamseyConfig::uniform(20e-6, 64, 1e6, CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6), 0);
  const TrackingResult r = track_frequency(qubit, 3.0, cfg, 4);
  EXPECT_TRUE(r.gaps.empty());
  ASSERT_EQ(r.truth.size(), r.estimate.size());
  for (std::size_t k = 0; k < r.truth.size(); ++k) {
    EXPECT_NEAR(r.estimate.frequency_offsets[k], r.truth.frequency_offsets[k], 1e-2);
  }
}

TEST(TrackFrequency, ControllerScaleWithLongDelays) {
  const NoiseModel1f controller = NoiseModel1f::tuned(0.2, 0.01, 3600.0, 30.0);
  const RamseyConfig cfg = RamseyConfig::uniform(1.0, 64, 10.0, CoherenceParams::none(), 1000);
  const TrackingResult r = track_frequency(controller, 1.0, cfg, 8, TraceSource::kController);
  EXPECT_TRUE(r.gaps.empty());
  EXPECT_EQ(r.estimate.source, TraceSource::kController);
  EXPECT_NEAR(drift_sigma(r.estimate), drift_sigma(r.truth), 0.1 * drift_sigma(r.truth));
}

TEST(TrackFrequency, NegligibleDriftGivesFlatEstimate) {
  // A model with no drift at all is rejected; a vanishing one must track as flat.
  const NoiseModel1f quiet{1e-12, 0.0};
  const RamseyConfig cfg =
      RamseyConfig::uniform(20e-6, 64, 1e6, CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6), 0);
  const TrackingResult r = track_frequency(quiet, 1.0, cfg, 1);
  EXPECT_TRUE(r.gaps.empty());
  for (double x : r.estimate.frequency_offsets) EXPECT_NEAR(x, 0.0, 1e-2);
  EXPECT_THROW(track_frequency(quiet, 0.5, cfg, 1), InvalidInput);
}

TEST(FidelityVsDetuning, SharedSeedsAndSymmetry) {
  RbConfig c;
  c.lengths = {1, 4, 16, 64};
  c.n_sequences = 10;
  c.pulse.duration = 12.5e-9;
  const std::vector<double> offsets{0.0, 5e6, -5e6};
  const auto pts = fidelity_vs_detuning(offsets, c);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_DOUBLE_EQ(pts[0].fidelity, run_rb(c).fidelity);
  EXPECT_LT(pts[1].fidelity, pts[0].fidelity - 0.01);
  EXPECT_NEAR(pts[1].fidelity, pts[2].fidelity, 3 * std::hypot(pts[1].fidelity_se, pts[2].fidelity_se));
}

}  // namespace
}  // namespace qnl
