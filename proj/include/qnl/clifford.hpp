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

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qnl {

/// A driven rotation: `area` radians about the equatorial axis at `phase`.
struct PhysicalPulse {
  double phase = 0.0;
  double area = 0.0;
};

/// Frame update costing no pulse; later pulses are re-phased by -angle.
struct VirtualZ {
  double angle = 0.0;
};

using GateStep = std::variant<PhysicalPulse, VirtualZ>;

struct CliffordElement {
  int index = 0;
  std::string label;
  Eigen::Matrix2cd unitary;  // determinant 1
  std::vector<GateStep> decomposition;

  int pulse_count() const;
};

/// The 24 single-qubit Cliffords compiled into +-pi/2 and pi pulses about X
/// and Y. Element 0 is the identity (empty decomposition).
const std::vector<CliffordElement>& clifford_table();

/// Propagator of a resonant pulse under H = -Omega (cos(phi) X + sin(phi) Y):
/// exp(+i area/2 (cos(phi) X + sin(phi) Y)).
Eigen::Matrix2cd pulse_unitary(double phase, double area);

/// exp(-i angle/2 Z).
Eigen::Matrix2cd virtual_z_unitary(double angle);

/// Time-ordered product of a decomposition's ideal steps.
Eigen::Matrix2cd decomposition_unitary(const std::vector<GateStep>& steps);

/// |tr(a^dag b)| / 2 >= 1 - tol.
bool equal_up_to_phase(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b, double tol = 1e-10);

/// Index of the table element equal to `u` up to phase; throws InvalidInput
/// if `u` is not a Clifford.
int clifford_lookup(const Eigen::Matrix2cd& u);

/// Index of (second after first), i.e. U_second * U_first.
int clifford_compose(int first, int second);

int clifford_inverse(int index);

}  // namespace qnl
