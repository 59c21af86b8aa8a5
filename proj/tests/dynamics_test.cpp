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
#include "qnl/dynamics.hpp"
#include "qnl/noise.hpp"
#include "qnl/pulse.hpp"

namespace qnl {
namespace {

constexpr double kT1 = 8.66e-6;
constexpr double kT2 = 9.08e-6;

double max_abs_diff(const Operator& a, const Operator& b) { return (a - b).cwiseAbs().maxCoeff(); }

TEST(DriveHamiltonian, ZeroEnvelopeGivesZeroOperator) {
  const DriveParams p(1.0, 0.3, 0.7);
  EXPECT_EQ(drive_hamiltonian(p, 0.0, 1.234).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DriveHamiltonian, PhaseZeroIsMinusSigmaX) {
  const Operator h = drive_hamiltonian(DriveParams(1.0, 0.0, 0.0), 1.0, 5.0);
  EXPECT_LT(max_abs_diff(h, -pauli_x()), 1e-15);
}

TEST(DriveHamiltonian, PhaseHalfPiIsMinusSigmaY) {
  const Operator h = drive_hamiltonian(DriveParams(1.0, 0.0, kPi / 2), 1.0, 0.0);
  EXPECT_LT(max_abs_diff(h, -pauli_y()), 1e-15);
}

TEST(DriveHamiltonian, ResonantFormMatchesAxisSelection) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double rabi = std::abs(u(rng)), v = u(rng), phi = u(rng), t = u(rng);
    const Operator h = drive_hamiltonian(DriveParams(rabi, 0.0, phi), v, t);
    const Operator expected = -rabi * v * (std::cos(phi) * pauli_x() + std::sin(phi) * pauli_y());
    EXPECT_LT(max_abs_diff(h, expected), 1e-12);
    EXPECT_TRUE(is_hermitian<double>(h, 1e-14));
  }
}

TEST(DriveHamiltonian, DetuningRotatesPhaseInTime) {
  const DriveParams p(2.0, 3.0, 0.5);
  const double t = 0.25;
  const Operator h = drive_hamiltonian(p, 1.0, t);
  const Operator expected = drive_hamiltonian(DriveParams(2.0, 0.0, 0.5 + 3.0 * t), 1.0, 0.0);
  EXPECT_LT(max_abs_diff(h, expected), 1e-14);
}

TEST(DriveHamiltonian, RejectsNonFiniteEnvelope) {
  EXPECT_THROW(drive_hamiltonian(DriveParams(1.0, 0.0, 0.0), std::nan(""), 0.0), InvalidInput);
  EXPECT_THROW(DriveParams(-1.0, 0.0, 0.0), InvalidInput);
}

TEST(DriveHamiltonian, ThreeLevelCouplingIsSqrtTwo) {
  LevelModel lm;
  lm.levels = 3;
  const Operator h = drive_hamiltonian(DriveParams(1.0, 0.0, 0.0), 1.0, 0.0, lm);
  ASSERT_EQ(h.rows(), 3);
  EXPECT_NEAR(std::abs(h(1, 2)), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(h(2, 2).real(), lm.anharmonicity, 1e-6);
}

TEST(DephasingTime, MeasuredCoherenceTimes) {
  // Hand evaluation of 1/(1/9.08 - 1/17.32) microseconds.
  const double oracle = 1.0 / (1.0 / 9.08e-6 - 1.0 / 17.32e-6);
  EXPECT_NEAR(dephasing_time(kT1, kT2), oracle, 1e-18);
  EXPECT_NEAR(dephasing_time(kT1, kT2), 19.1e-6, 0.05e-6);
}

TEST(DephasingTime, T2AtTwiceT1IsInfinite) { EXPECT_TRUE(std::isinf(dephasing_time(10e-6, 20e-6))); }

TEST(DephasingTime, T2BeyondTwiceT1IsUnphysical) {
  EXPECT_THROW(dephasing_time(10e-6, 25e-6), UnphysicalCoherence);
  EXPECT_THROW(CoherenceParams::from_t1_t2(10e-6, 25e-6), UnphysicalCoherence);
  EXPECT_THROW(dephasing_time(-1.0, 1.0), UnphysicalCoherence);
}

TEST(DensityMatrixInvariants, ConstructorRejectsBadStates) {
  Operator m = Operator::Zero(2, 2);
  m(0, 0) = 0.5;
  EXPECT_THROW(DensityMatrix{m}, InvalidInput);  // trace
  m(0, 0) = 1.0;
  m(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{m}, InvalidInput);  // not Hermitian
  m = Operator::Zero(2, 2);
  m(0, 0) = 1.5;
  m(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix{m}, InvalidInput);  // negative eigenvalue
  EXPECT_THROW(DensityMatrix{Operator::Identity(4, 4) / 4.0}, InvalidInput);
}

TEST(LindbladStep, ExcitedStateDecaysWithT1) {
  const auto coh = CoherenceParams::from_t1_t2(kT1, 2 * kT1);
  DensityMatrix rho = DensityMatrix::basis(2, 1);
  const Operator h = Operator::Zero(2, 2);
  const double dt = 10e-9;
  for (int k = 1; k <= 1000; ++k) {
    rho = lindblad_step(rho, h, coh, dt);
    if (k % 100 == 0) {
      EXPECT_NEAR(rho.population(1), std::exp(-k * dt / kT1), 1e-6);
    }
  }
}

TEST(LindbladStep, GroundStateIsFixedPoint) {
  const auto coh = CoherenceParams::from_t1_t2(1e-6, 0.3e-6);
  DensityMatrix rho = DensityMatrix::ground();
  for (int k = 0; k < 100; ++k) rho = lindblad_step(rho, Operator::Zero(2, 2), coh, 50e-9);
  EXPECT_LT(max_abs_diff(rho.matrix(), DensityMatrix::ground().matrix()), 1e-14);
}

TEST(LindbladStep, CoherenceDecaysWithT2) {
  const auto coh = CoherenceParams::from_t1_t2(kT1, kT2);
  LiouvilleVector plus(2);
  plus << 1.0, 1.0;
  DensityMatrix rho = DensityMatrix::from_ket(plus);
  const double dt = 20e-9;
  for (int k = 1; k <= 500; ++k) {
    rho = lindblad_step(rho, Operator::Zero(2, 2), coh, dt);
    if (k % 50 == 0) {
      EXPECT_NEAR(std::abs(rho(0, 1)), 0.5 * std::exp(-k * dt / kT2), 1e-6);
    }
  }
}

TEST(LindbladStep, RejectsBadArguments) {
  const auto coh = CoherenceParams::from_t1_t2(kT1, kT2);
  const DensityMatrix rho = DensityMatrix::ground();
  Operator bad = Operator::Zero(2, 2);
  bad(0, 1) = 1.0;
  EXPECT_THROW(lindblad_step(rho, bad, coh, 1e-9), InvalidInput);
  EXPECT_THROW(lindblad_step(rho, Operator::Zero(2, 2), coh, 0.0), InvalidInput);
  EXPECT_THROW(lindblad_step(rho, Operator::Zero(2, 2), coh, -1e-9), InvalidInput);
}

TEST(LindbladStep, InvariantsHoldOverManySteps) {
  const auto coh = CoherenceParams::from_t1_t2(kT1, kT2);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  DensityMatrix rho = DensityMatrix::ground();
  const double rabi = kTwoPi * 20e6;
  for (int k = 0; k < 10000; ++k) {
    const cdouble amp(n(rng), n(rng));
    const Operator h = carrier_frame_hamiltonian(rabi, amp, kTwoPi * 1e6 * n(rng));
    rho = lindblad_step(rho, h, coh, 0.5e-9);
    ASSERT_LT(std::abs(rho.matrix().trace() - 1.0), 1e-9);
    ASSERT_TRUE(is_hermitian<double>(rho.matrix(), 1e-12));
    ASSERT_GE(rho.min_eigenvalue(), -1e-9);
  }
}

TEST(LindbladStep, UnitaryWithoutDecoherence) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  DensityMatrix rho = DensityMatrix::ground();
  for (int k = 0; k < 2000; ++k) {
    const Operator h = carrier_frame_hamiltonian(kTwoPi * 20e6, cdouble(n(rng), n(rng)), kTwoPi * 2e6);
    rho = lindblad_step(rho, h, CoherenceParams::none(), 0.5e-9);
  }
  EXPECT_NEAR(rho.purity(), 1.0, 1e-8);
}

TEST(Evolve, ResonantPiPulseInvertsWithoutDecoherence) {
  const auto pulse = make_envelope(EnvelopeShape::kSquare, 20e-9, kPi, 0.5e-9);
  const auto prop = evolve(DensityMatrix::ground(), pulse, CoherenceParams::none());
  EXPECT_NEAR(prop.final_state().population(1), 1.0, 1e-6);
}

TEST(Evolve, DetunedRabiMatchesAnalyticFormula) {
  const double rotation = kTwoPi * 20e6;  // 2 * Omega_R
  const double detuning = kTwoPi * 10e6;
  const double gen = std::hypot(rotation, detuning);
  const int n = 1000;
  PulseSchedule s;
  s.sample_period = (kPi / gen) / n;  // ends at the first population maximum
  s.rabi_scale = 0.5 * rotation;
  s.detuning = detuning;
  s.samples.assign(n, cdouble(1.0, 0.0));
  s.segments.push_back({0, static_cast<std::size_t>(n), 0.0});
  EvolveOptions opts;
  opts.keep_trajectory = true;
  const auto prop = evolve(DensityMatrix::ground(), s, CoherenceParams::none(), nullptr, opts);
  ASSERT_EQ(prop.states.size(), prop.times.size());
  for (std::size_t k = 0; k < prop.states.size(); k += 50) {
    EXPECT_NEAR(prop.states[k].population(1), oracle::detuned_rabi_population(rotation, detuning, prop.times[k]), 1e-6);
  }
  const double peak = rotation * rotation / (gen * gen);
  EXPECT_NEAR(prop.final_state().population(1), peak, 1e-6);
}

TEST(Evolve, TrajectoryTimesAreUniform) {
  const auto pulse = make_envelope(EnvelopeShape::kGaussian, 10e-9, kPi / 2, 0.5e-9);
  EvolveOptions opts;
  opts.keep_trajectory = true;
  opts.substeps = 2;
  const auto prop = evolve(DensityMatrix::ground(), pulse, CoherenceParams::from_t1_t2(kT1, kT2), nullptr, opts);
  EXPECT_DOUBLE_EQ(prop.dt, 0.25e-9);
  for (std::size_t k = 1; k < prop.times.size(); ++k) {
    EXPECT_NEAR(prop.times[k] - prop.times[k - 1], prop.dt, 1e-21);
  }
}

TEST(Evolve, DecoherentPiPulseAgreesWithFineStepReference) {
  const auto coh = CoherenceParams::from_t1_t2(kT1, kT2);
  const auto pulse = make_envelope(EnvelopeShape::kGaussian, 20e-9, kPi, 0.5e-9);
  const auto prop = evolve(DensityMatrix::ground(), pulse, coh);

  oracle::LMatrix rho0 = oracle::LMatrix::Zero(2, 2);
  rho0(0, 0) = 1;
  const oracle::LMatrix ref = oracle::rk4_two_level(rho0, pulse.samples, pulse.sample_period, pulse.rabi_scale, 0.0,
                                                    coh.gamma1(), coh.gamma_phi(), 10);
  const double p_ref = static_cast<double>(ref(1, 1).real());
  EXPECT_NEAR(prop.final_state().population(1), p_ref, 1e-9);
  EXPECT_LT(p_ref, 1.0);
  EXPECT_GT(p_ref, 1.0 - 20e-9 / kT1);
}

TEST(Evolve, HalvingSamplePeriodLeavesGatesUnchanged) {
  const auto coh = CoherenceParams::from_t1_t2(kT1, kT2);
  for (double area : {kPi / 2, kPi}) {
    for (double phase : {0.0, kPi / 2, kPi, 3 * kPi / 2}) {
      const auto coarse = make_envelope(EnvelopeShape::kGaussian, 20e-9, area, 0.5e-9, phase);
      const auto fine = make_envelope(EnvelopeShape::kGaussian, 20e-9, area, 0.25e-9, phase);
      const auto a = evolve(DensityMatrix::ground(), coarse, coh).final_state().matrix();
      const auto b = evolve(DensityMatrix::ground(), fine, coh).final_state().matrix();
      EXPECT_GT(oracle::state_fidelity_2x2(a, b), 1.0 - 1e-6);
    }
  }
}

TEST(Evolve, OppositePhaseUndoesRotation) {
  for (double phi : {0.0, 0.4, 1.3, kPi / 2, 4.0}) {
    PulseSchedule s = make_envelope(EnvelopeShape::kGaussian, 20e-9, 0.7 * kPi, 0.5e-9, phi);
    s.append(make_envelope(EnvelopeShape::kGaussian, 20e-9, 0.7 * kPi, 0.5e-9, phi + kPi));
    const auto rho = evolve(DensityMatrix::ground(), s, CoherenceParams::none()).final_state();
    EXPECT_GT(rho.population(0), 1.0 - 1e-8);
  }
}

TEST(Evolve, EmptyScheduleReturnsInput) {
  LiouvilleVector ket(2);
  ket << 0.6, cdouble(0.0, 0.8);
  const DensityMatrix rho0 = DensityMatrix::from_ket(ket);
  PulseSchedule empty;
  empty.sample_period = 0.5e-9;
  const auto prop = evolve(rho0, empty, CoherenceParams::from_t1_t2(kT1, kT2));
  EXPECT_EQ(prop.final_state().matrix(), rho0.matrix());
}

TEST(Evolve, NoiseLengthMustMatchSchedule) {
  const auto pulse = make_envelope(EnvelopeShape::kSquare, 10e-9, kPi, 0.5e-9);
  const auto noise = white_noise(1, 0.01, pulse.size() + 1);
  EXPECT_THROW(evolve(DensityMatrix::ground(), pulse, CoherenceParams::none(), &noise), InvalidInput);
}

TEST(Evolve, QuadratureNoiseTiltsTheRotationAxis) {
  // A constant quadrature offset q on a square pulse rotates about an axis
  // tilted by atan(q) with rate scaled by sqrt(1 + q^2).
  const auto pulse = make_envelope(EnvelopeShape::kSquare, 20e-9, kPi, 0.5e-9);
  NoiseRealization noise;
  noise.in_phase.assign(pulse.size(), 0.0);
  noise.quadrature.assign(pulse.size(), 0.3);
  const auto noisy = evolve(DensityMatrix::ground(), pulse, CoherenceParams::none(), &noise).final_state();
  const double angle = kPi * std::sqrt(1.0 + 0.09);
  EXPECT_NEAR(noisy.population(1), std::pow(std::sin(0.5 * angle), 2), 1e-9);
}

TEST(Evolve, ThreeLevelShortPulseLeaks) {
  LevelModel lm;
  lm.levels = 3;
  EvolveOptions opts;
  opts.levels = lm;
  const auto fast = make_envelope(EnvelopeShape::kSquare, 2e-9, kPi, 0.05e-9);
  const auto slow = make_envelope(EnvelopeShape::kGaussian, 40e-9, kPi, 0.5e-9);
  const auto coh = CoherenceParams::from_t1_t2(kT1, kT2);
  const auto leaky = evolve(DensityMatrix::ground(3), fast, coh, nullptr, opts).final_state();
  const auto clean = evolve(DensityMatrix::ground(3), slow, coh, nullptr, opts).final_state();
  EXPECT_GT(leaky.population(2), 1e-2);
  EXPECT_LT(clean.population(2), 1e-3);
  EXPECT_NEAR(leaky.matrix().trace().real(), 1.0, 1e-9);
  EXPECT_GE(leaky.min_eigenvalue(), -1e-9);
}

TEST(Evolve, ThreeLevelDecayCascadesThroughFirstLevel) {
  LevelModel lm;
  lm.levels = 3;
  lm.leak_decay_rate = 1.0 / 2e-6;
  const auto coh = CoherenceParams::from_t1_t2(kT1, kT2);
  DensityMatrix rho = DensityMatrix::basis(3, 2);
  for (int k = 0; k < 100; ++k) rho = lindblad_step(rho, Operator::Zero(3, 3), coh, 10e-9, lm);
  EXPECT_NEAR(rho.population(2), std::exp(-1e-6 / 2e-6), 1e-9);
  EXPECT_GT(rho.population(1), 0.0);
}

}  // namespace
}  // namespace qnl
