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

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "qnl/noise.hpp"
#include "qnl/pulse.hpp"
#include "qnl/types.hpp"

namespace qnl {

// ---------------------------------------------------------------------------
// Operator algebra. Templated on the real scalar so the same expressions serve
// double-precision production code and long-double reference integrations in
// the tests.
// ---------------------------------------------------------------------------

template <typename Scalar = double>
OperatorT<Scalar> pauli_x() {
  OperatorT<Scalar> m = OperatorT<Scalar>::Zero(2, 2);
  m(0, 1) = m(1, 0) = Complex<Scalar>(1);
  return m;
}

template <typename Scalar = double>
OperatorT<Scalar> pauli_y() {
  OperatorT<Scalar> m = OperatorT<Scalar>::Zero(2, 2);
  m(0, 1) = Complex<Scalar>(0, -1);
  m(1, 0) = Complex<Scalar>(0, 1);
  return m;
}

template <typename Scalar = double>
OperatorT<Scalar> pauli_z() {
  OperatorT<Scalar> m = OperatorT<Scalar>::Zero(2, 2);
  m(0, 0) = Complex<Scalar>(1);
  m(1, 1) = Complex<Scalar>(-1);
  return m;
}

/// |from-1><from| on a dim-level ladder (|0> is the ground state).
template <typename Scalar = double>
OperatorT<Scalar> ladder_lowering(int dim, int from) {
  OperatorT<Scalar> m = OperatorT<Scalar>::Zero(dim, dim);
  m(from - 1, from) = Complex<Scalar>(1);
  return m;
}

template <typename Derived>
auto commutator(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Derived>& b) {
  return (a * b - b * a).eval();
}

/// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
template <typename Scalar>
LiouvilleVectorT<Scalar> vectorize(const OperatorT<Scalar>& rho) {
  return Eigen::Map<const LiouvilleVectorT<Scalar>>(rho.data(), rho.size());
}

template <typename Scalar>
OperatorT<Scalar> unvectorize(const LiouvilleVectorT<Scalar>& v, int dim) {
  return Eigen::Map<const OperatorT<Scalar>>(v.data(), dim, dim);
}

/// Superoperator of rho -> -i [H, rho].
template <typename Scalar>
SuperOperatorT<Scalar> hamiltonian_superoperator(const OperatorT<Scalar>& h) {
  const auto dim = h.rows();
  const OperatorT<Scalar> id = OperatorT<Scalar>::Identity(dim, dim);
  const Complex<Scalar> minus_i(0, -1);
  SuperOperatorT<Scalar> left = Eigen::kroneckerProduct(id, h);
  SuperOperatorT<Scalar> right = Eigen::kroneckerProduct(h.transpose(), id);
  return minus_i * (left - right);
}

/// Superoperator of D[L] rho = L rho L^dag - 1/2 {L^dag L, rho}.
template <typename Scalar>
SuperOperatorT<Scalar> dissipator(const OperatorT<Scalar>& jump) {
  const auto dim = jump.rows();
  const OperatorT<Scalar> id = OperatorT<Scalar>::Identity(dim, dim);
  const OperatorT<Scalar> ldl = jump.adjoint() * jump;
  SuperOperatorT<Scalar> out = Eigen::kroneckerProduct(jump.conjugate(), jump);
  out -= Scalar(0.5) * SuperOperatorT<Scalar>(Eigen::kroneckerProduct(id, ldl));
  out -= Scalar(0.5) * SuperOperatorT<Scalar>(Eigen::kroneckerProduct(ldl.transpose(), id));
  return out;
}

template <typename Scalar>
bool is_hermitian(const OperatorT<Scalar>& m, Scalar tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Hermitian, unit-trace, positive semidefinite d x d matrix (d = 2 or 3).
template <typename Scalar>
class BasicDensityMatrix {
 public:
  static constexpr double kTraceTolerance = 1e-9;
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kPositivityTolerance = 1e-9;

  /// Validates every invariant; throws InvalidInput on violation.
  explicit BasicDensityMatrix(OperatorT<Scalar> elements) : rho_(std::move(elements)) {
    if (rho_.rows() != rho_.cols() || (rho_.rows() != 2 && rho_.rows() != 3)) {
      throw InvalidInput("density matrix must be 2x2 or 3x3");
    }
    if (std::abs(rho_.trace() - Complex<Scalar>(1)) > Scalar(kTraceTolerance)) {
      throw InvalidInput("density matrix trace deviates from 1");
    }
    if (!is_hermitian<Scalar>(rho_, Scalar(kHermitianTolerance))) {
      throw InvalidInput("density matrix is not Hermitian");
    }
    if (min_eigenvalue() < -Scalar(kPositivityTolerance)) {
      throw InvalidInput("density matrix is not positive semidefinite");
    }
  }

  static BasicDensityMatrix basis(int dim, int level) {
    OperatorT<Scalar> m = OperatorT<Scalar>::Zero(dim, dim);
    m(level, level) = Complex<Scalar>(1);
    return BasicDensityMatrix(std::move(m));
  }

  static BasicDensityMatrix ground(int dim = 2) { return basis(dim, 0); }

  static BasicDensityMatrix from_ket(const LiouvilleVectorT<Scalar>& ket) {
    const LiouvilleVectorT<Scalar> psi = ket.normalized();
    return BasicDensityMatrix(psi * psi.adjoint());
  }

  int dim() const { return static_cast<int>(rho_.rows()); }
  const OperatorT<Scalar>& matrix() const { return rho_; }
  Complex<Scalar> operator()(int i, int j) const { return rho_(i, j); }

  Scalar population(int level) const { return rho_(level, level).real(); }
  Scalar purity() const { return (rho_ * rho_).trace().real(); }

  Scalar min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<OperatorT<Scalar>> es(rho_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  /// Uhlmann fidelity against a pure reference state.
  Scalar overlap(const LiouvilleVectorT<Scalar>& ket) const {
    return (ket.adjoint() * rho_ * ket)(0, 0).real();
  }

 private:
  OperatorT<Scalar> rho_;
};

using DensityMatrix = BasicDensityMatrix<double>;

// ---------------------------------------------------------------------------
// Physical parameters
// ---------------------------------------------------------------------------

/// Drive of the form -Omega_R V(t) [[0, e^{-i(dw t + phi)}], [e^{+i(dw t + phi)}, 0]].
struct DriveParams {
  DriveParams() = default;
  DriveParams(double rabi_rate, double detuning, double phase);

  double rabi_rate = 0.0;  // rad/s
  double detuning = 0.0;   // rad/s
  double phase = 0.0;      // rad, in [0, 2 pi)
};

/// Pure-dephasing time from 1/t_phi = 1/t2 - 1/(2 t1). Infinity when t2 == 2 t1.
double dephasing_time(double t1, double t2);

/// T1/T2 decoherence. Infinite times switch the corresponding channel off.
class CoherenceParams {
 public:
  /// Throws UnphysicalCoherence when t2 > 2 t1 or a time is non-positive.
  static CoherenceParams from_t1_t2(double t1, double t2);
  static CoherenceParams none();

  double t1() const { return t1_; }
  double t2() const { return t2_; }
  double t_phi() const { return t_phi_; }
  double gamma1() const { return std::isinf(t1_) ? 0.0 : 1.0 / t1_; }
  double gamma_phi() const { return std::isinf(t_phi_) ? 0.0 : 1.0 / t_phi_; }

 private:
  CoherenceParams(double t1, double t2, double t_phi) : t1_(t1), t2_(t2), t_phi_(t_phi) {}

  double t1_;
  double t2_;
  double t_phi_;
};

/// Optional leakage level. With levels == 3 the ladder gains |2> detuned by
/// the anharmonicity; the default -2 pi x 300 MHz is a typical transmon value,
/// not a measured parameter of any device.
struct LevelModel {
  int levels = 2;
  double anharmonicity = -kTwoPi * 300e6;   // rad/s
  std::optional<double> leak_decay_rate;    // 1/s for |2> -> |1>; defaults to 1/T1
};

/// Drive Hamiltonian in the frame rotating with the qubit: the detuning
/// appears as a time-dependent phase on the off-diagonal couplings.
Operator drive_hamiltonian(const DriveParams& params, double envelope_value, double t,
                           const LevelModel& levels = {});

/// Time-independent Hamiltonian in the frame rotating at the pulse carrier.
/// `amplitude` is the complex baseband envelope V e^{i phi}.
Operator carrier_frame_hamiltonian(double rabi_rate, cdouble amplitude, double detuning,
                                   const LevelModel& levels = {});

/// Lindblad generator -i[H, .] + G1 D[sigma_-] + (Gphi/2) D[sigma_z] with a
/// cached dissipative part; the Hamiltonian part is rebuilt per call.
class Liouvillian {
 public:
  Liouvillian(int dim, const CoherenceParams& coherence, const LevelModel& levels = {});

  int dim() const { return dim_; }
  const SuperOperator& dissipative_part() const { return dissipator_; }
  SuperOperator generator(const Operator& h) const;
  SuperOperator propagator(const Operator& h, double dt) const;

 private:
  int dim_;
  SuperOperator dissipator_;
};

/// One exact step exp(L dt) of the master equation.
DensityMatrix lindblad_step(const DensityMatrix& rho, const Operator& h,
                            const CoherenceParams& coherence, double dt,
                            const LevelModel& levels = {});

struct Propagation {
  double dt = 0.0;
  std::vector<DensityMatrix> states;
  std::vector<double> times;

  const DensityMatrix& final_state() const { return states.back(); }
};

struct EvolveOptions {
  LevelModel levels;
  int substeps = 1;               // integrator steps per envelope sample
  bool keep_trajectory = false;
};

/// Piecewise-constant propagation of `rho0` through `schedule`. Noise samples
/// are added to the complex envelope (in-phase to Re, quadrature to Im).
Propagation evolve(const DensityMatrix& rho0, const PulseSchedule& schedule,
                   const CoherenceParams& coherence, const NoiseRealization* noise = nullptr,
                   const EvolveOptions& options = {});

}  // namespace qnl
