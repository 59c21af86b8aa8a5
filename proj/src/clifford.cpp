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

#include "qnl/clifford.hpp"

#include <array>
#include <cmath>
#include <complex>

#include "qnl/types.hpp"

namespace qnl {

namespace {

constexpr double kHalfPi = 0.5 * kPi;

const PhysicalPulse kX90{0.0, kHalfPi};
const PhysicalPulse kMinusX90{kPi, kHalfPi};
const PhysicalPulse kY90{kHalfPi, kHalfPi};
const PhysicalPulse kMinusY90{1.5 * kPi, kHalfPi};
const PhysicalPulse kX180{0.0, kPi};
const PhysicalPulse kY180{kHalfPi, kPi};

struct Tables {
  std::vector<CliffordElement> elements;
  std::array<std::array<int, 24>, 24> product{};  // product[first][second]
  std::array<int, 24> inverse{};
};

Eigen::Matrix2cd special_unitary(const Eigen::Matrix2cd& u) {
  return u / std::sqrt(u.determinant());
}

int find_index(const std::vector<CliffordElement>& elements, const Eigen::Matrix2cd& u) {
  for (const auto& e : elements) {
    if (equal_up_to_phase(e.unitary, u, 1e-9)) return e.index;
  }
  return -1;
}

Tables build_tables() {
  const std::vector<std::pair<std::string, std::vector<GateStep>>> recipes = {
      {"I", {}},
      {"X", {kX180}},
      {"Y", {kY180}},
      {"Y,X", {kY180, kX180}},
      {"X/2,Y/2", {kX90, kY90}},
      {"X/2,-Y/2", {kX90, kMinusY90}},
      {"-X/2,Y/2", {kMinusX90, kY90}},
      {"-X/2,-Y/2", {kMinusX90, kMinusY90}},
      {"Y/2,X/2", {kY90, kX90}},
      {"Y/2,-X/2", {kY90, kMinusX90}},
      {"-Y/2,X/2", {kMinusY90, kX90}},
      {"-Y/2,-X/2", {kMinusY90, kMinusX90}},
      {"X/2", {kX90}},
      {"-X/2", {kMinusX90}},
      {"Y/2", {kY90}},
      {"-Y/2", {kMinusY90}},
      {"-X/2,Y/2,X/2", {kMinusX90, kY90, kX90}},
      {"-X/2,-Y/2,X/2", {kMinusX90, kMinusY90, kX90}},
      {"X,Y/2", {kX180, kY90}},
      {"X,-Y/2", {kX180, kMinusY90}},
      {"Y,X/2", {kY180, kX90}},
      {"Y,-X/2", {kY180, kMinusX90}},
      {"X/2,Y/2,X/2", {kX90, kY90, kX90}},
      {"-X/2,Y/2,-X/2", {kMinusX90, kY90, kMinusX90}},
  };

  Tables t;
  for (std::size_t i = 0; i < recipes.size(); ++i) {
    CliffordElement e;
    e.index = static_cast<int>(i);
    e.label = recipes[i].first;
    e.decomposition = recipes[i].second;
    e.unitary = special_unitary(decomposition_unitary(e.decomposition));
    if (find_index(t.elements, e.unitary) >= 0) throw std::logic_error("duplicate Clifford element " + e.label);
    t.elements.push_back(std::move(e));
  }
  for (int a = 0; a < 24; ++a) {
    for (int b = 0; b < 24; ++b) {
      const int k = find_index(t.elements, t.elements[b].unitary * t.elements[a].unitary);
      if (k < 0) throw std::logic_error("Clifford table is not closed");
      t.product[a][b] = k;
      if (k == 0) t.inverse[a] = b;
    }
  }
  return t;
}

const Tables& tables() {
  static const Tables t = build_tables();
  return t;
}

}  // namespace

int CliffordElement::pulse_count() const {
  int n = 0;
  for (const auto& step : decomposition) n += std::holds_alternative<PhysicalPulse>(step) ? 1 : 0;
  return n;
}

Eigen::Matrix2cd pulse_unitary(double phase, double area) {
  const std::complex<double> i(0.0, 1.0);
  Eigen::Matrix2cd axis;
  axis << 0.0, std::polar(1.0, -phase), std::polar(1.0, phase), 0.0;
  return std::cos(0.5 * area) * Eigen::Matrix2cd::Identity() + i * std::sin(0.5 * area) * axis;
}

Eigen::Matrix2cd virtual_z_unitary(double angle) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
  u(0, 0) = std::polar(1.0, -0.5 * angle);
  u(1, 1) = std::polar(1.0, 0.5 * angle);
  return u;
}

Eigen::Matrix2cd decomposition_unitary(const std::vector<GateStep>& steps) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  for (const auto& step : steps) {
    if (const auto* p = std::get_if<PhysicalPulse>(&step)) {
      u = pulse_unitary(p->phase, p->area) * u;
    } else {
      u = virtual_z_unitary(std::get<VirtualZ>(step).angle) * u;
    }
  }
  return u;
}

bool equal_up_to_phase(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b, double tol) {
  return std::abs((a.adjoint() * b).trace()) / 2.0 >= 1.0 - tol;
}

const std::vector<CliffordElement>& clifford_table() { return tables().elements; }

int clifford_lookup(const Eigen::Matrix2cd& u) {
  const int k = find_index(tables().elements, u);
  if (k < 0) throw InvalidInput("unitary is not a single-qubit Clifford");
  return k;
}

int clifford_compose(int first, int second) {
  if (first < 0 || first >= 24 || second < 0 || second >= 24) throw InvalidInput("Clifford index out of range");
  return tables().product[first][second];
}

int clifford_inverse(int index) {
  if (index < 0 || index >= 24) throw InvalidInput("Clifford index out of range");
  return tables().inverse[index];
}

}  // namespace qnl
