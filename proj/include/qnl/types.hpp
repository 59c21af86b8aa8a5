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

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qnl {

template <typename Scalar>
using Complex = std::complex<Scalar>;

/// Dense complex operator on a d-level Hilbert space (d = 2 or 3).
template <typename Scalar>
using OperatorT = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Liouville-space operator acting on column-stacked density matrices.
template <typename Scalar>
using SuperOperatorT = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using LiouvilleVectorT = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

using cdouble = Complex<double>;
using Operator = OperatorT<double>;
using SuperOperator = SuperOperatorT<double>;
using LiouvilleVector = LiouvilleVectorT<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Error taxonomy. Every fallible operation throws one of these.

class QnlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public QnlError {
 public:
  using QnlError::QnlError;
};

class UnphysicalCoherence : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class FitFailure : public QnlError {
 public:
  using QnlError::QnlError;
};

class UnachievableTarget : public QnlError {
 public:
  using QnlError::QnlError;
};

}  // namespace qnl
