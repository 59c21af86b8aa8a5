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

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qnl/rb.hpp"

namespace qnl {

struct SnrFidelityPoint {
  double snr = 0.0;                     // linear
  double error_rate = 0.0;              // percent
  double error_rate_uncertainty = 0.0;  // percent
};

enum class OffsetMode { kFixed, kFree };

/// error% = a exp(-b snr / snr_unit) + offset.
struct SnrFit {
  double a_coeff = 0.0;
  double b_coeff = 0.0;
  double offset = 0.0;
  double snr_unit = 1e6;
  bool offset_fitted = false;
  bool weighted = false;
  Eigen::MatrixXd covariance;  // over (a, b[, offset])
  double chi_square = 0.0;
  int dof = 0;

  double reduced_chi_square() const { return dof > 0 ? chi_square / dof : 0.0; }
  /// Model value in percent. With include_offset=false this is the
  /// offset-free curve (the intrinsic noise-driven error alone).
  double evaluate(double snr, bool include_offset = true) const;
};

/// Levenberg-Marquardt fit of the exponential law. Inverse-variance weights
/// are used when every point carries a positive uncertainty.
SnrFit fit_snr_model(std::span<const SnrFidelityPoint> points, OffsetMode mode, double offset_value = 0.0,
                     double snr_unit = 1e6);

/// Linear SNR at which the model reaches `target_error` percent. Targets at
/// or above the curve's x = 0 value return 0; targets at or below the floor
/// throw UnachievableTarget.
double required_snr(double target_error, const SnrFit& fit, bool include_offset);

struct Measured {
  double value = 0.0;
  double uncertainty = 0.0;
};

/// Error budget in percent. eps_cor = 100 - f_sim, eps_others = f_sim - f_exp.
struct ErrorBudget {
  Measured f_sim;
  Measured f_exp;
  Measured eps_cor;
  Measured eps_others;
};

ErrorBudget error_budget(Measured f_sim, Measured f_exp);

struct SnrSweepResult {
  std::vector<SnrFidelityPoint> points;
  SnrFidelityPoint baseline;  // noise-free run, snr field = +inf
  SnrFit fit;
  double runs_test_p = 1.0;
  std::vector<RbResult> rb_results;  // baseline first, then one per SNR value
};

/// Runs RB at each SNR (sharing sequences and noise streams between points),
/// then fits the exponential law with the offset fixed to the noise-free
/// baseline error.
SnrSweepResult snr_sweep(const std::vector<double>& snr_values, const RbConfig& config, std::uint64_t seed,
                         double snr_unit = 1e6);

/// Two-sided Wald-Wolfowitz runs test on residual signs, using the exact
/// distribution of the run count. Zero residuals are ignored.
double runs_test_p_value(std::span<const double> residuals);

}  // namespace qnl
