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

#include "qnl/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace qnl {

namespace {

double wrap_phase(double phase) {
  double w = std::fmod(phase, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

void check_levels(const LevelModel& levels) {
  if (levels.levels != 2 && levels.levels != 3) throw InvalidInput("level model must have 2 or 3 levels");
  if (levels.levels == 3 && !std::isfinite(levels.anharmonicity)) {
    throw InvalidInput("three-level model needs a finite anharmonicity");
  }
}

bool hamiltonian_is_hermitian(const Operator& h) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  return is_hermitian<double>(h, 1e-12 * scale);
}

}  // namespace

DriveParams::DriveParams(double rabi_rate_, double detuning_, double phase_)
    : rabi_rate(rabi_rate_), detuning(detuning_), phase(wrap_phase(phase_)) {
  if (!(rabi_rate >= 0.0) || !std::isfinite(rabi_rate)) throw InvalidInput("rabi_rate must be finite and >= 0");
  if (!std::isfinite(detuning) || !std::isfinite(phase_)) throw InvalidInput("drive parameters must be finite");
}

double dephasing_time(double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw UnphysicalCoherence("coherence times must be positive");
  if (std::isinf(t2)) {
    if (!std::isinf(t1)) throw UnphysicalCoherence("t2 exceeds 2*t1");
    return std::numeric_limits<double>::infinity();
  }
  if (t2 > 2.0 * t1) throw UnphysicalCoherence("t2 exceeds 2*t1");
  const double rate = 1.0 / t2 - (std::isinf(t1) ? 0.0 : 0.5 / t1);
  // Rounding can leave a tiny negative rate at t2 == 2 t1.
  if (rate <= 1e-12 / t2) return std::numeric_limits<double>::infinity();
  return 1.0 / rate;
}

CoherenceParams CoherenceParams::from_t1_t2(double t1, double t2) {
  return CoherenceParams(t1, t2, dephasing_time(t1, t2));
}

CoherenceParams CoherenceParams::none() {
  const double inf = std::numeric_limits<double>::infinity();
  return CoherenceParams(inf, inf, inf);
}

Operator drive_hamiltonian(const DriveParams& params, double envelope_value, double t, const LevelModel& levels) {
  if (!std::isfinite(envelope_value)) throw InvalidInput("envelope value must be finite");
  if (!std::isfinite(t)) throw InvalidInput("time must be finite");
  check_levels(levels);
  const int dim = levels.levels;
  const double theta = params.detuning * t + params.phase;
  const double coupling = -params.rabi_rate * envelope_value;
  const cdouble up = std::polar(coupling, -theta);  // <0|H|1>

  Operator h = Operator::Zero(dim, dim);
  h(0, 1) = up;
  h(1, 0) = std::conj(up);
  if (dim == 3) {
    h(1, 2) = std::sqrt(2.0) * up;
    h(2, 1) = std::conj(h(1, 2));
    h(2, 2) = levels.anharmonicity;
  }
  return h;
}

Operator carrier_frame_hamiltonian(double rabi_rate, cdouble amplitude, double detuning, const LevelModel& levels) {
  check_levels(levels);
  const int dim = levels.levels;
  const cdouble up = -rabi_rate * std::conj(amplitude);  // <0|H|1>

  Operator h = Operator::Zero(dim, dim);
  h(0, 1) = up;
  h(1, 0) = std::conj(up);
  h(1, 1) = detuning;
  if (dim == 3) {
    h(1, 2) = std::sqrt(2.0) * up;
    h(2, 1) = std::conj(h(1, 2));
    h(2, 2) = 2.0 * detuning + levels.anharmonicity;
  }
  return h;
}

Liouvillian::Liouvillian(int dim, const CoherenceParams& coherence, const LevelModel& levels) : dim_(dim) {
  if (dim != 2 && dim != 3) throw InvalidInput("Liouvillian dimension must be 2 or 3");
  dissipator_ = SuperOperator::Zero(dim * dim, dim * dim);
  if (const double g1 = coherence.gamma1(); g1 > 0.0) {
    dissipator_ += g1 * dissipator<double>(ladder_lowering<double>(dim, 1));
  }
  if (const double gphi = coherence.gamma_phi(); gphi > 0.0) {
    Operator z = Operator::Zero(dim, dim);
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    dissipator_ += 0.5 * gphi * dissipator<double>(z);
  }
  if (dim == 3) {
    const double g21 = levels.leak_decay_rate.value_or(coherence.gamma1());
    if (g21 < 0.0) throw InvalidInput("leak decay rate must be >= 0");
    if (g21 > 0.0) dissipator_ += g21 * dissipator<double>(ladder_lowering<double>(3, 2));
  }
}

SuperOperator Liouvillian::generator(const Operator& h) const {
  return hamiltonian_superoperator<double>(h) + dissipator_;
}

SuperOperator Liouvillian::propagator(const Operator& h, double dt) const {
  return (generator(h) * cdouble(dt)).exp();
}

DensityMatrix lindblad_step(const DensityMatrix& rho, const Operator& h, const CoherenceParams& coherence, double dt,
                            const LevelModel& levels) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("dt must be positive");
  if (h.rows() != rho.dim() || h.cols() != rho.dim()) throw InvalidInput("Hamiltonian dimension mismatch");
  if (!hamiltonian_is_hermitian(h)) throw InvalidInput("Hamiltonian is not Hermitian");
  LevelModel lm = levels;
  lm.levels = rho.dim();
  const Liouvillian liouvillian(rho.dim(), coherence, lm);
  const LiouvilleVector v = liouvillian.propagator(h, dt) * vectorize<double>(rho.matrix());
  Operator out = unvectorize<double>(v, rho.dim());
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

Propagation evolve(const DensityMatrix& rho0, const PulseSchedule& schedule, const CoherenceParams& coherence,
                   const NoiseRealization* noise, const EvolveOptions& options) {
  if (noise != nullptr && noise->size() != schedule.size()) {
    throw InvalidInput("noise realization length does not match the schedule");
  }
  if (noise != nullptr && noise->quadrature.size() != noise->in_phase.size()) {
    throw InvalidInput("noise realization has mismatched quadratures");
  }
  if (options.substeps < 1) throw InvalidInput("substeps must be >= 1");
  if (schedule.size() > 0 && !(schedule.sample_period > 0.0)) throw InvalidInput("sample_period must be positive");

  Propagation prop;
  prop.dt = schedule.sample_period / options.substeps;
  if (schedule.size() == 0) {
    prop.states.push_back(rho0);
    prop.times.push_back(0.0);
    return prop;
  }

  const int dim = rho0.dim();
  LevelModel lm = options.levels;
  lm.levels = dim;
  const Liouvillian liouvillian(dim, coherence, lm);

  if (options.keep_trajectory) {
    prop.states.reserve(schedule.size() * options.substeps + 1);
    prop.times.reserve(schedule.size() * options.substeps + 1);
    prop.states.push_back(rho0);
    prop.times.push_back(0.0);
  }

  LiouvilleVector v = vectorize<double>(rho0.matrix());
  SuperOperator step;
  cdouble last_amplitude(std::numeric_limits<double>::quiet_NaN(), 0.0);
  std::size_t step_index = 0;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    cdouble amplitude = schedule.samples[k];
    if (noise != nullptr) amplitude += (*noise)[k];
    if (amplitude != last_amplitude) {
      step = liouvillian.propagator(carrier_frame_hamiltonian(schedule.rabi_scale, amplitude, schedule.detuning, lm),
                                    prop.dt);
      last_amplitude = amplitude;
    }
    for (int s = 0; s < options.substeps; ++s) {
      v = step * v;
      ++step_index;
      if (options.keep_trajectory) {
        Operator m = unvectorize<double>(v, dim);
        prop.states.emplace_back(0.5 * (m + m.adjoint()));
        prop.times.push_back(static_cast<double>(step_index) * prop.dt);
      }
    }
  }
  if (!options.keep_trajectory) {
    Operator m = unvectorize<double>(v, dim);
    prop.states.emplace_back(0.5 * (m + m.adjoint()));
    prop.times.push_back(static_cast<double>(step_index) * prop.dt);
  }
  return prop;
}

}  // namespace qnl
