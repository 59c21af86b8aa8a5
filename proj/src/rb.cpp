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

#include "qnl/rb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "qnl/lsq.hpp"
#include "qnl/noise.hpp"
#include "qnl/parallel.hpp"

namespace qnl {

namespace {

constexpr double kHalfPi = 0.5 * kPi;

// Seed streams: sequences, noise waveforms, readout shots.
constexpr std::uint64_t kSequenceStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kShotStream = 3;

PulseSchedule quarter_turn(const GatePulseConfig& pulse) {
  return make_envelope(pulse.shape, pulse.duration, kHalfPi, pulse.sample_period);
}

int quarter_turns(double area) {
  const double q = area / kHalfPi;
  const long r = std::lround(q);
  if (r < 0 || std::abs(q - static_cast<double>(r)) > 1e-9) {
    throw InvalidInput("pulse area must be a multiple of pi/2");
  }
  return static_cast<int>(r);
}

// Superoperators of single pi/2 slots at a given drive phase, computed from
// the same per-sample propagators evolve() uses.
class SlotPropagators {
 public:
  SlotPropagators(const GatePulseConfig& pulse, const RbConfig& config)
      : base_(quarter_turn(pulse)), config_(config), liouvillian_(config.levels.levels, config.coherence, config.levels) {
    for (double phase : {0.0, kHalfPi, kPi, 1.5 * kPi}) cache_.emplace(key(phase), compute(phase));
  }

  SuperOperator get(double phase) const {
    const auto it = cache_.find(key(phase));
    return it != cache_.end() ? it->second : compute(phase);
  }

 private:
  static long key(double phase) {
    double w = std::fmod(phase, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return std::lround(w * 1e9);
  }

  SuperOperator compute(double phase) const {
    const int d2 = config_.levels.levels * config_.levels.levels;
    SuperOperator total = SuperOperator::Identity(d2, d2);
    const cdouble rot = std::polar(1.0, phase);
    for (const auto& z : base_.samples) {
      const Operator h = carrier_frame_hamiltonian(base_.rabi_scale, z * rot, config_.detuning, config_.levels);
      total = liouvillian_.propagator(h, base_.sample_period) * total;
    }
    return total;
  }

  PulseSchedule base_;
  const RbConfig& config_;
  Liouvillian liouvillian_;
  std::map<long, SuperOperator> cache_;
};

LiouvilleVector apply_noise_free(const std::vector<int>& cliffords, const SlotPropagators& slots, LiouvilleVector v) {
  const auto& table = clifford_table();
  double frame = 0.0;
  for (int c : cliffords) {
    for (const auto& step : table[c].decomposition) {
      if (const auto* p = std::get_if<PhysicalPulse>(&step)) {
        const SuperOperator s = slots.get(p->phase - frame);
        for (int k = 0, n = quarter_turns(p->area); k < n; ++k) v = s * v;
      } else {
        frame += std::get<VirtualZ>(step).angle;
      }
    }
  }
  return v;
}

void validate(const RbConfig& config) {
  if (config.lengths.empty()) throw InvalidInput("RB needs at least one sequence length");
  for (std::size_t i = 0; i < config.lengths.size(); ++i) {
    if (config.lengths[i] < 1) throw InvalidInput("RB sequence lengths must be >= 1");
    if (i > 0 && config.lengths[i] <= config.lengths[i - 1]) throw InvalidInput("RB lengths must be increasing");
  }
  if (config.n_sequences < 2) throw InvalidInput("RB needs at least two sequences per length");
  if (config.shots < 1) throw InvalidInput("RB needs at least one shot");
  if (config.snr && !(*config.snr > 0.0)) throw InvalidInput("SNR must be positive");
  if (!(config.readout_error >= 0.0 && config.readout_error <= 0.5)) {
    throw InvalidInput("readout error must be in [0, 0.5]");
  }
  if (config.levels.levels != 2 && config.levels.levels != 3) throw InvalidInput("levels must be 2 or 3");
}

}  // namespace

RBSequence random_sequence(int m, std::uint64_t seed) {
  if (m < 1) throw InvalidInput("sequence length must be >= 1");
  RBSequence seq;
  seq.seed = seed;
  seq.elements.resize(static_cast<std::size_t>(m));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 23);
  int total = 0;
  for (auto& e : seq.elements) {
    e = pick(rng);
    total = clifford_compose(total, e);
  }
  seq.recovery = clifford_inverse(total);
  return seq;
}

PulseSchedule sequence_schedule(const std::vector<int>& cliffords, const GatePulseConfig& pulse, double detuning) {
  const PulseSchedule base = quarter_turn(pulse);
  const auto& table = clifford_table();
  PulseSchedule out;
  out.sample_period = base.sample_period;
  out.rabi_scale = base.rabi_scale;
  double frame = 0.0;
  for (int c : cliffords) {
    if (c < 0 || c >= 24) throw InvalidInput("Clifford index out of range");
    for (const auto& step : table[c].decomposition) {
      if (const auto* p = std::get_if<PhysicalPulse>(&step)) {
        for (int k = 0, n = quarter_turns(p->area); k < n; ++k) out.append(base, p->phase - frame);
      } else {
        frame += std::get<VirtualZ>(step).angle;
      }
    }
  }
  out.detuning = detuning;
  return out;
}

double reference_signal_rms(const GatePulseConfig& pulse) { return quarter_turn(pulse).rms_amplitude(); }

double fidelity_from_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("depolarizing parameter must be in (0, 1]");
  return 1.0 - (1.0 - p) / 2.0;
}

RbFit fit_rb_decay(std::span<const int> lengths, std::span<const double> survivals, std::span<const double> sem) {
  const std::size_t n = lengths.size();
  if (survivals.size() != n || (!sem.empty() && sem.size() != n)) throw InvalidInput("fit_rb_decay: size mismatch");
  std::vector<int> distinct(lengths.begin(), lengths.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw InvalidInput("fit_rb_decay: need at least three distinct lengths");

  const auto [min_it, max_it] = std::minmax_element(survivals.begin(), survivals.end());
  const double p_min = *min_it;
  const double p_max = *max_it;

  RbFit fit;
  if (p_max - p_min < 1e-12) {
    // No decay at all.
    fit.a = 0.0;
    fit.b = std::clamp(p_min, 0.0, 1.0);
    fit.p = 1.0;
    return fit;
  }

  const bool weighted = !sem.empty() && std::all_of(sem.begin(), sem.end(), [](double s) { return s > 0.0; });

  double b0 = std::clamp(p_min, 0.0, 1.0);
  double a0 = p_max - p_min;
  double p0 = 0.99;
  {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = survivals[i] - b0;
      if (d <= 1e-9 * a0) continue;
      const double x = lengths[i];
      const double y = std::log(d);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++k;
    }
    if (k >= 2) {
      const double denom = k * sxx - sx * sx;
      if (denom > 0.0) p0 = std::clamp(std::exp((k * sxy - sx * sy) / denom), 1e-6, 1.0);
    }
  }

  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weighted ? 1.0 / sem[i] : 1.0;
      const double m = lengths[i];
      const double pm = std::pow(x[2], m);
      r[static_cast<Eigen::Index>(i)] = w * (x[0] * pm + x[1] - survivals[i]);
      if (jac != nullptr) {
        const auto row = static_cast<Eigen::Index>(i);
        (*jac)(row, 0) = w * pm;
        (*jac)(row, 1) = w;
        (*jac)(row, 2) = w * x[0] * m * std::pow(x[2], m - 1.0);
      }
    }
  };

  ParameterBounds bounds;
  bounds.lower = Eigen::Vector3d(-2.0, 0.0, 1e-12);
  bounds.upper = Eigen::Vector3d(2.0, 1.0, 1.0);
  const LsqResult res =
      levenberg_marquardt(residual, Eigen::Vector3d(a0, b0, p0), static_cast<int>(n), LsqOptions{}, bounds);

  if (!res.converged || !res.covariance_valid) {
    std::ostringstream msg;
    msg << "RB decay fit failed (" << res.message << ", covariance " << (res.covariance_valid ? "ok" : "singular")
        << ", iterations " << res.iterations << ", params a=" << res.params[0] << " b=" << res.params[1]
        << " p=" << res.params[2] << ")";
    throw FitFailure(msg.str());
  }

  double scale = res.reduced_chi_square();
  if (weighted) scale = std::max(1.0, scale);
  fit.a = res.params[0];
  fit.b = res.params[1];
  fit.p = res.params[2];
  fit.a_se = std::sqrt(std::max(0.0, res.covariance(0, 0) * scale));
  fit.b_se = std::sqrt(std::max(0.0, res.covariance(1, 1) * scale));
  fit.p_se = std::sqrt(std::max(0.0, res.covariance(2, 2) * scale));
  fit.reduced_chi_square = res.reduced_chi_square();
  fit.iterations = res.iterations;
  return fit;
}

RbResult run_rb(const RbConfig& config) {
  validate(config);
  const std::size_t n_lengths = config.lengths.size();
  const std::size_t n_seq = static_cast<std::size_t>(config.n_sequences);
  const int dim = config.levels.levels;

  const SlotPropagators slots(config.pulse, config);
  const double signal_rms = reference_signal_rms(config.pulse);
  const double noise_rms =
      config.snr ? noise_rms_for_snr(*config.snr, signal_rms, config.noise_bandwidth_factor) : 0.0;

  RbResult result;
  result.lengths = config.lengths;
  result.shots = config.shots;
  result.gate_duration = config.pulse.duration;
  result.survivals.assign(n_lengths, std::vector<double>(n_seq, 0.0));

  parallel_for(n_lengths * n_seq, config.jobs, [&](std::size_t task) {
    const std::size_t li = task / n_seq;
    const std::size_t si = task % n_seq;
    const auto m = static_cast<std::uint64_t>(config.lengths[li]);
    const RBSequence seq = random_sequence(config.lengths[li], derive_seed(config.seed, kSequenceStream, m, si));
    std::vector<int> gates = seq.elements;
    gates.push_back(seq.recovery);

    const DensityMatrix rho0 = DensityMatrix::ground(dim);
    double p0 = 1.0;
    if (config.snr) {
      const PulseSchedule schedule = sequence_schedule(gates, config.pulse, config.detuning);
      EvolveOptions opts;
      opts.levels = config.levels;
      if (schedule.size() > 0) {
        const NoiseRealization noise =
            white_noise(derive_seed(config.seed, kNoiseStream, m, si), noise_rms, schedule.size());
        p0 = evolve(rho0, schedule, config.coherence, &noise, opts).final_state().population(0);
      }
    } else {
      const LiouvilleVector v = apply_noise_free(gates, slots, vectorize<double>(rho0.matrix()));
      p0 = v[0].real();
    }
    p0 = std::clamp(p0, 0.0, 1.0);
    const double e = config.readout_error;
    const double p_read = (1.0 - e) * p0 + e * (1.0 - p0);
    // One uniform per shot, thresholded: the count is binomial and monotone in
    // p_read, so runs sharing a seed stay ordered when only the noise differs.
    std::mt19937_64 rng(derive_seed(config.seed, kShotStream, m, si));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    int survived = 0;
    for (int k = 0; k < config.shots; ++k) survived += uniform(rng) < p_read ? 1 : 0;
    result.survivals[li][si] = static_cast<double>(survived) / config.shots;
  });

  for (std::size_t li = 0; li < n_lengths; ++li) {
    const auto& s = result.survivals[li];
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n_seq);
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n_seq - 1);
    result.mean_survival.push_back(mean);
    result.sem_survival.push_back(std::sqrt(var / static_cast<double>(n_seq)));
  }

  try {
    result.fit = fit_rb_decay(result.lengths, result.mean_survival, result.sem_survival);
    result.fidelity = fidelity_from_p(result.fit.p);
    result.fidelity_se = result.fit.p_se / 2.0;
    result.fit_ok = true;
  } catch (const FitFailure& e) {
    result.fit_ok = false;
    result.fit_message = e.what();
    result.fidelity = std::numeric_limits<double>::quiet_NaN();
    result.fidelity_se = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

double clifford_average_error(const RbConfig& config) {
  validate(config);
  const SlotPropagators slots(config.pulse, config);
  const int dim = config.levels.levels;

  // Pauli eigenstates: an exact state 2-design for the average fidelity.
  const double h = 1.0 / std::sqrt(2.0);
  const cdouble i(0.0, 1.0);
  const std::vector<Eigen::Vector2cd> probes = {
      Eigen::Vector2cd(1, 0),     Eigen::Vector2cd(0, 1),      Eigen::Vector2cd(h, h),
      Eigen::Vector2cd(h, -h),    Eigen::Vector2cd(h, i * h),  Eigen::Vector2cd(h, -i * h)};

  const auto& table = clifford_table();
  double total = 0.0;
  for (const auto& element : table) {
    double fid = 0.0;
    for (const auto& probe : probes) {
      LiouvilleVector ket = LiouvilleVector::Zero(dim);
      ket.head<2>() = probe;
      const Operator rho = ket * ket.adjoint();
      const LiouvilleVector out = apply_noise_free({element.index}, slots, vectorize<double>(rho));
      LiouvilleVector target = LiouvilleVector::Zero(dim);
      target.head<2>() = element.unitary * probe;
      fid += (target.adjoint() * unvectorize<double>(out, dim) * target)(0, 0).real();
    }
    total += fid / static_cast<double>(probes.size());
  }
  return 1.0 - total / static_cast<double>(table.size());
}

DurationCalibration calibrate_gate_duration(double target_fidelity, const RbConfig& base,
                                            const std::vector<double>& durations) {
  if (durations.size() < 2) throw InvalidInput("calibration needs at least two durations");
  if (!(target_fidelity > 0.5 && target_fidelity < 1.0)) throw InvalidInput("target fidelity must be in (0.5, 1)");
  DurationCalibration cal;
  cal.durations = durations;
  cal.target_error = 1.0 - target_fidelity;
  RbConfig cfg = base;
  for (double d : durations) {
    cfg.pulse.duration = d;
    cal.error_per_clifford.push_back(clifford_average_error(cfg));
  }
  cal.monotone = true;
  for (std::size_t k = 1; k < durations.size(); ++k) {
    if (!(durations[k] > durations[k - 1]) || !(cal.error_per_clifford[k] > cal.error_per_clifford[k - 1])) {
      cal.monotone = false;
    }
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < durations.size(); ++k) {
    sxy += durations[k] * cal.error_per_clifford[k];
    sxx += durations[k] * durations[k];
  }
  cal.slope = sxy / sxx;
  for (std::size_t k = 0; k < durations.size(); ++k) {
    const double dev = std::abs(cal.error_per_clifford[k] / (cal.slope * durations[k]) - 1.0);
    cal.max_linearity_deviation = std::max(cal.max_linearity_deviation, dev);
  }

  // Linear interpolation inside the sweep, proportional extrapolation outside.
  double guess = cal.target_error / cal.slope;
  for (std::size_t k = 1; k < durations.size(); ++k) {
    const double e0 = cal.error_per_clifford[k - 1];
    const double e1 = cal.error_per_clifford[k];
    if ((e0 - cal.target_error) * (e1 - cal.target_error) <= 0.0 && e1 != e0) {
      guess = durations[k - 1] + (cal.target_error - e0) * (durations[k] - durations[k - 1]) / (e1 - e0);
      break;
    }
  }

  // Snap to the sample grid, keeping whichever neighbour lands closer.
  const double period = base.pulse.sample_period;
  const double lo = std::max(2.0, std::floor(guess / period)) * period;
  const double hi = std::max(2.0, std::ceil(guess / period)) * period;
  cfg.pulse.duration = lo;
  const double err_lo = clifford_average_error(cfg);
  cfg.pulse.duration = hi;
  const double err_hi = clifford_average_error(cfg);
  cal.calibrated_duration =
      std::abs(err_lo - cal.target_error) <= std::abs(err_hi - cal.target_error) ? lo : hi;
  return cal;
}

}  // namespace qnl
