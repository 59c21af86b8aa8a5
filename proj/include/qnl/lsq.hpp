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

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace qnl {

/// Residual callback: fills `residuals` for `params`; when `jacobian` is
/// non-null it must also fill d residual_i / d param_j.
using ResidualFunction =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals, Eigen::MatrixXd* jacobian)>;

struct LsqOptions {
  int max_iterations = 500;
  double relative_tolerance = 1e-15;  // on cost decrease and step length
  double initial_lambda = 1e-3;
  bool analytic_jacobian = true;       // false: central differences
};

struct ParameterBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct LsqResult {
  Eigen::VectorXd params;
  /// (J^T J)^{-1} at the solution, unscaled. Residuals are expected to be
  /// pre-weighted by their standard deviations; scale by reduced chi-square
  /// for unweighted data.
  Eigen::MatrixXd covariance;
  double chi_square = 0.0;
  int dof = 0;
  int iterations = 0;
  bool converged = false;
  bool covariance_valid = false;
  std::string message;

  double reduced_chi_square() const { return dof > 0 ? chi_square / dof : 0.0; }
};

/// Levenberg-Marquardt with Marquardt diagonal scaling and box constraints
/// enforced by projecting each trial step.
LsqResult levenberg_marquardt(const ResidualFunction& fn, Eigen::VectorXd initial, int residual_count,
                              const LsqOptions& options = {},
                              const std::optional<ParameterBounds>& bounds = std::nullopt);

}  // namespace qnl
