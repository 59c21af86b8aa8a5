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

// Acceptance suite: one PASS/FAIL line per criterion, with measured values.
//   qnl_acceptance [--criterion N] [--jobs J]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "qnl/clifford.hpp"
#include "qnl/drift.hpp"
#include "qnl/dynamics.hpp"
#include "qnl/rb.hpp"
#include "qnl/snr_fit.hpp"
#include "qnl/spectral.hpp"

namespace {

using namespace qnl;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a sub-check; the criterion passes only if every check does.
  void check(bool ok, const std::string& what) {
    if (!detail.str().empty()) detail << "; ";
    detail << what << (ok ? "" : " [FAIL]");
    pass = pass && ok;
  }
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

int g_jobs = 1;

std::vector<double> calibration_grid() {
  std::vector<double> d;
  for (int k = 0; k <= 12; ++k) d.push_back(10e-9 + 2.5e-9 * k);
  return d;
}

RbConfig calibrated_rb(double* duration_out = nullptr, DurationCalibration* cal_out = nullptr) {
  RbConfig base;
  base.jobs = g_jobs;
  const DurationCalibration cal = calibrate_gate_duration(0.99849, base, calibration_grid());
  base.pulse.duration = cal.calibrated_duration;
  if (duration_out != nullptr) *duration_out = cal.calibrated_duration;
  if (cal_out != nullptr) *cal_out = cal;
  return base;
}

// 1. Decoherence-limited RB baseline with a calibrated gate duration.
void decoherence_baseline(Outcome& o) {
  DurationCalibration cal;
  double duration = 0.0;
  RbConfig rb = calibrated_rb(&duration, &cal);
  o.check(cal.monotone, "error vs duration monotone");
  o.check(cal.max_linearity_deviation <= 0.10,
          "linear in duration within " + fmt(100 * cal.max_linearity_deviation, 3) + "% (limit 10%)");
  rb.seed = 1;
  const RbResult r = run_rb(rb);
  o.check(r.fit_ok, "RB fit converged");
  const double f = 100.0 * r.fidelity;
  o.check(std::abs(f - 99.849) <= 0.05, "pi/2 = " + fmt(duration * 1e9, 4) + " ns, F = " + fmt(f, 7) + " +- " +
                                            fmt(100 * r.fidelity_se, 3) + " % (target 99.849 +- 0.05)");
}

// 2. Threshold arithmetic for A = 1.682, b = 0.9898.
void threshold_arithmetic(Outcome& o) {
  SnrFit fit;
  fit.a_coeff = 1.682;
  fit.b_coeff = 0.9898;
  fit.offset = 0.0;
  const double s1 = required_snr(0.1, fit, false);
  const double s2 = required_snr(0.01, fit, false);
  o.check(std::abs(s1 - 2.85e6) <= 0.005e6, "0.1% -> " + fmt(s1, 4) + " (expect 2.85e6)");
  o.check(std::abs(s2 - 5.18e6) <= 0.005e6, "0.01% -> " + fmt(s2, 4) + " (expect 5.18e6)");
  o.check(std::abs(s1 / 2.9e6 - 1.0) <= 0.05 && std::abs(s2 / 5.2e6 - 1.0) <= 0.05, "within 5% of 2.9e6 / 5.2e6");
}

// 3. Error-budget identities. Values compare to floating-point round-off;
// uncertainties compare at the three decimals the inputs are quoted with.
void budget_identity(Outcome& o) {
  const ErrorBudget b = error_budget({99.849, 0.001}, {99.833, 0.014});
  auto at3 = [](double v) { return std::round(v * 1000.0) / 1000.0; };
  o.check(std::abs(b.eps_cor.value - 0.151) < 1e-9 && b.eps_cor.uncertainty == 0.001,
          "eps_cor = " + fmt(b.eps_cor.value, 12) + " +- " + fmt(b.eps_cor.uncertainty));
  o.check(std::abs(b.eps_others.value - 0.016) < 1e-9 && at3(b.eps_others.uncertainty) == 0.014,
          "eps_others = " + fmt(b.eps_others.value, 12) + " +- " + fmt(b.eps_others.uncertainty));
}

// 4. End-to-end SNR sweep: monotone, exponential fit quality, plateau.
void snr_sweep_behaviour(Outcome& o) {
  RbConfig rb;
  rb.jobs = g_jobs;
  rb.pulse.duration = 12.5e-9;
  rb.noise_bandwidth_factor = 3.75e4;
  const std::vector<double> grid{1.0e5, 2.6827e5, 7.1969e5, 1.9307e6, 5.1795e6, 1.3895e7, 3.7276e7, 1.0e8};
  const SnrSweepResult s = snr_sweep(grid, rb, 1);
  o.check(grid.back() / grid.front() >= 1e3, "grid spans " + fmt(std::log10(grid.back() / grid.front()), 3) + " decades");

  bool monotone = true;
  std::ostringstream errs;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (i > 0 && s.points[i].error_rate > s.points[i - 1].error_rate) monotone = false;
    errs << (i ? "," : "") << fmt(s.points[i].error_rate, 4);
  }
  o.check(monotone, "error % = [" + errs.str() + "] non-increasing");
  const double chi2 = s.fit.reduced_chi_square();
  o.check(chi2 < 2.0, "A = " + fmt(s.fit.a_coeff, 4) + ", b = " + fmt(s.fit.b_coeff, 4) + ", reduced chi2 = " +
                          fmt(chi2, 4) + " (limit 2), runs p = " + fmt(s.runs_test_p, 3));
  const auto& top = s.points.back();
  const double sigma = std::hypot(top.error_rate_uncertainty, s.baseline.error_rate_uncertainty);
  o.check(std::abs(top.error_rate - s.baseline.error_rate) <= 2.0 * sigma,
          "plateau " + fmt(top.error_rate, 4) + " vs baseline " + fmt(s.baseline.error_rate, 4) + " +- " +
              fmt(sigma, 3));
}

// 5. Drift statistics for qubit- and controller-grade traces.
void drift_statistics(Outcome& o) {
  const double qubit_duration = 20 * 3600.0, dt = 30.0, corner = 0.01;
  const NoiseModel1f qubit = NoiseModel1f::tuned(5000.0, corner, qubit_duration, dt);
  const FrequencyTrace q = synthesize_drift(qubit, qubit_duration, dt, 1);
  const double q_sigma = drift_sigma(q);
  o.check(std::abs(q_sigma / 5000.0 - 1.0) <= 0.10, "qubit sigma " + fmt(q_sigma, 5) + " Hz");

  const PsdEstimate psd = welch_psd(q.frequency_offsets, dt);
  const auto band = std::make_pair(psd.frequencies.front(), psd.frequencies.back());
  const PsdModelFit fit = fit_psd_model(psd, band.first, band.second, true);
  o.check(std::abs(fit.slope + 1.0) <= 0.2, "pink slope " + fmt(fit.slope, 3) + " +- " + fmt(fit.slope_se, 2));
  bool pink_dominates = true;
  int below = 0;
  for (double f : psd.frequencies) {
    if (f >= corner) break;
    ++below;
    if (!(fit.pink_coefficient * std::pow(f, fit.slope) > fit.white_level)) pink_dominates = false;
  }
  o.check(pink_dominates && below > 0,
          "pink > white in all " + std::to_string(below) + " bins below " + fmt(corner) + " Hz");

  const double ctrl_duration = 24 * 3600.0;
  const NoiseModel1f ctrl = NoiseModel1f::tuned(0.2, corner, ctrl_duration, dt);
  const FrequencyTrace c = synthesize_drift(ctrl, ctrl_duration, dt, 1, TraceSource::kController);
  const double c_sigma = drift_sigma(c);
  o.check(std::abs(c_sigma / 0.2 - 1.0) <= 0.25, "controller sigma " + fmt(c_sigma, 4) + " Hz");

  const RamseyConfig q_ramsey =
      RamseyConfig::uniform(20e-6, 64, 1e6, CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6), 100);
  const TrackingResult qt = track_frequency(qubit, 20.0, q_ramsey, 1);
  const double qt_ratio = drift_sigma(qt.estimate) / drift_sigma(qt.truth);
  o.check(std::abs(qt_ratio - 1.0) <= 0.15, "qubit tracker sigma ratio " + fmt(qt_ratio, 4) + ", " +
                                                std::to_string(qt.gaps.size()) + " gaps");

  const RamseyConfig c_ramsey = RamseyConfig::uniform(1.0, 64, 10.0, CoherenceParams::none(), 1000);
  const TrackingResult ct = track_frequency(ctrl, 24.0, c_ramsey, 1, TraceSource::kController);
  const double ct_ratio = drift_sigma(ct.estimate) / drift_sigma(ct.truth);
  o.check(std::abs(ct_ratio - 1.0) <= 0.15, "controller tracker sigma ratio " + fmt(ct_ratio, 4) + ", " +
                                                std::to_string(ct.gaps.size()) + " gaps");
}

// 6. Always-on property suites.
void property_suites(Outcome& o) {
  {
    const auto coh = CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 1.0);
    DensityMatrix rho = DensityMatrix::ground();
    double worst_trace = 0.0, worst_herm = 0.0, worst_eig = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const Operator h = carrier_frame_hamiltonian(kTwoPi * 20e6, cdouble(n(rng), n(rng)), kTwoPi * 1e6 * n(rng));
      rho = lindblad_step(rho, h, coh, 0.5e-9);
      worst_trace = std::max(worst_trace, std::abs(rho.matrix().trace() - 1.0));
      worst_herm = std::max(worst_herm, (rho.matrix() - rho.matrix().adjoint()).cwiseAbs().maxCoeff());
      worst_eig = std::min(worst_eig, rho.min_eigenvalue());
    }
    o.check(worst_trace < 1e-9 && worst_herm < 1e-12 && worst_eig > -1e-9,
            "Lindblad 1e4 steps: trace " + fmt(worst_trace, 2) + ", herm " + fmt(worst_herm, 2) + ", min eig " +
                fmt(worst_eig, 2));
  }
  {
    const double rotation = kTwoPi * 20e6, detuning = kTwoPi * 10e6;
    const double gen = std::hypot(rotation, detuning);
    const int n = 1000;
    PulseSchedule s;
    s.sample_period = (kPi / gen) / n;
    s.rabi_scale = 0.5 * rotation;
    s.detuning = detuning;
    s.samples.assign(n, cdouble(1.0, 0.0));
    s.segments.push_back({0, static_cast<std::size_t>(n), 0.0});
    EvolveOptions opts;
    opts.keep_trajectory = true;
    const auto prop = evolve(DensityMatrix::ground(), s, CoherenceParams::none(), nullptr, opts);
    double worst = 0.0;
    for (std::size_t k = 0; k < prop.states.size(); ++k) {
      worst = std::max(worst, std::abs(prop.states[k].population(1) -
                                       oracle::detuned_rabi_population(rotation, detuning, prop.times[k])));
    }
    o.check(worst < 1e-6, "detuned Rabi max error " + fmt(worst, 2));
  }
  {
    const auto& table = clifford_table();
    int closed = 0;
    for (int a = 0; a < 24; ++a) {
      for (int b = 0; b < 24; ++b) {
        const Eigen::Matrix2cd u = table[b].unitary * table[a].unitary;
        int hits = 0;
        for (const auto& e : table) hits += std::abs((e.unitary.adjoint() * u).trace()) / 2.0 > 1.0 - 1e-10 ? 1 : 0;
        closed += hits == 1 ? 1 : 0;
      }
    }
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const RBSequence seq = random_sequence(1 + k * 3, derive_seed(6, k));
      Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
      for (int e : seq.elements) u = table[e].unitary * u;
      u = table[seq.recovery].unitary * u;
      worst = std::max(worst, 1.0 - std::abs(u.trace()) / 2.0);
    }
    o.check(closed == 576 && worst < 1e-10,
            "Clifford closure " + std::to_string(closed) + "/576, recovery deviation " + fmt(worst, 2));
  }
  {
    const auto coh = CoherenceParams::from_t1_t2(8.66e-6, 9.08e-6);
    const RamseyConfig cfg = RamseyConfig::uniform(20e-6, 64, 1e6, coh, 0);
    const double step = cfg.delays[1] - cfg.delays[0];
    double worst = 0.0;
    for (double offset : {-8e3, -2.5e3, 0.0, 1.2e3, 6e3}) {
      const auto pops = simulate_ramsey(cfg.delays, cfg.detuning_hz, coh, offset);
      const double truth = cfg.detuning_hz + offset;
      const double fft_peak = oracle::dft_peak_frequency(pops, step, 0.5 * truth, 1.5 * truth);
      const RamseyFit fit = fit_ramsey_fringe(cfg.delays, pops, coh.t2());
      worst = std::max(worst, std::abs(fit.frequency_hz / fft_peak - 1.0));
    }
    o.check(worst < 1e-3, "Ramsey fit vs DFT peak worst relative " + fmt(worst, 2));
  }
  {
    std::vector<SnrFidelityPoint> pts;
    for (int i = 0; i < 8; ++i) {
      const double s = 1e5 * std::pow(100.0, i / 7.0);
      pts.push_back({s, 1.682 * std::exp(-0.9898 * s / 1e6) + 0.167, 0.0});
    }
    const SnrFit snr = fit_snr_model(pts, OffsetMode::kFixed, 0.167);
    std::vector<int> m{2, 4, 8, 16, 32, 64, 128, 256};
    std::vector<double> p;
    for (int x : m) p.push_back(0.49 * std::pow(0.997, x) + 0.5);
    const RbFit rb = fit_rb_decay(m, p);
    const double worst = std::max({std::abs(snr.a_coeff - 1.682), std::abs(snr.b_coeff - 0.9898),
                                   std::abs(rb.a - 0.49), std::abs(rb.b - 0.5), std::abs(rb.p - 0.997)});
    o.check(worst < 1e-8, "noiseless fit round trip worst " + fmt(worst, 2));
  }
  {
    RbConfig c;
    c.lengths = {1, 8, 64};
    c.n_sequences = 6;
    c.pulse.duration = 12.5e-9;
    c.snr = 1e6;
    c.noise_bandwidth_factor = 3.75e4;
    bool identical = true;
    std::vector<std::vector<double>> reference;
    const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
    for (int jobs : {1, 2, static_cast<int>(hw)}) {
      c.jobs = jobs;
      const RbResult r = run_rb(c);
      std::vector<std::vector<double>> flat = r.survivals;
      flat.push_back({r.fidelity});
      if (reference.empty()) reference = flat;
      identical = identical && flat == reference;
    }
    o.check(identical, "bit-identical RB across 1, 2, " + std::to_string(hw) + " workers");
  }
}

// 7. Small frequency offsets do not limit fidelity; large ones do.
void detuning_robustness(Outcome& o) {
  RbConfig rb = calibrated_rb();
  rb.seed = 1;
  const std::vector<double> offsets{0.0, 5e3, -5e3, 5e6};
  const auto pts = fidelity_vs_detuning(offsets, rb);
  const double f0 = 100.0 * pts[0].fidelity;
  for (std::size_t i = 1; i < 3; ++i) {
    const double df = 100.0 * pts[i].fidelity - f0;
    o.check(std::abs(df) < 0.014, "dF(" + fmt(offsets[i], 3) + " Hz) = " + fmt(df, 3) + " %");
  }
  const double drop = f0 - 100.0 * pts[3].fidelity;
  o.check(drop > 1.0, "F(0) = " + fmt(f0, 6) + " %, drop at 5 MHz = " + fmt(drop, 4) + " %");
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> body;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qnl acceptance suite"};
  int only = 0;
  app.add_option("--criterion", only, "run only this criterion (1-7)")->check(CLI::Range(1, 7));
  g_jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--jobs", g_jobs, "worker threads for RB")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "decoherence-limited RB baseline", decoherence_baseline},
      {2, "required-SNR threshold arithmetic", threshold_arithmetic},
      {3, "error-budget identities", budget_identity},
      {4, "end-to-end SNR sweep", snr_sweep_behaviour},
      {5, "drift statistics", drift_statistics},
      {6, "property suites", property_suites},
      {7, "detuning robustness", detuning_robustness},
  };
  const double limits[] = {0, 600, 1, 60, 1200, 300, 600, 600};

  bool all = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(seconds <= limits[c.id], "runtime " + fmt(seconds, 3) + " s (limit " + fmt(limits[c.id]) + " s)");
    std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " " << c.name << ": " << o.detail.str()
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
