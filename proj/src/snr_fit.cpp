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

#include "qnl/snr_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qnl/lsq.hpp"

namespace qnl {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// P(R = r) for a random arrangement of n1 positives and n2 negatives.
double runs_probability(int r, int n1, int n2) {
  const double total = binomial(n1 + n2, n1);
  if (r % 2 == 0) {
    const int k = r / 2;
    return 2.0 * binomial(n1 - 1, k - 1) * binomial(n2 - 1, k - 1) / total;
  }
  const int k = (r - 1) / 2;
  return (binomial(n1 - 1, k - 1) * binomial(n2 - 1, k) + binomial(n1 - 1, k) * binomial(n2 - 1, k - 1)) / total;
}

}  // namespace

double SnrFit::evaluate(double snr, bool include_offset) const {
  return a_coeff * std::exp(-b_coeff * snr / snr_unit) + (include_offset ? offset : 0.0);
}

SnrFit fit_snr_model(std::span<const SnrFidelityPoint> points, OffsetMode mode, double offset_value, double snr_unit) {
  const std::size_t n = points.size();
  if (n < 4) throw InvalidInput("SNR fit needs at least four points");
  if (!(snr_unit > 0.0)) throw InvalidInput("SNR unit must be positive");
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = 0.0;
  double y_max = -std::numeric_limits<double>::infinity();
  double y_min = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    if (!(p.snr > 0.0) || !std::isfinite(p.snr)) throw InvalidInput("SNR values must be positive and finite");
    if (!(p.error_rate >= 0.0 && p.error_rate <= 100.0)) throw InvalidInput("error rates must be in [0, 100] percent");
    x_min = std::min(x_min, p.snr);
    x_max = std::max(x_max, p.snr);
    y_min = std::min(y_min, p.error_rate);
    y_max = std::max(y_max, p.error_rate);
  }
  if (x_max < 10.0 * x_min) throw InvalidInput("SNR points must span at least one decade");

  const bool free_offset = mode == OffsetMode::kFree;
  const bool weighted =
      std::all_of(points.begin(), points.end(), [](const SnrFidelityPoint& p) { return p.error_rate_uncertainty > 0.0; });

  double offset0 = free_offset ? std::max(0.0, y_min - 0.05 * (y_max - y_min)) : offset_value;
  double a0 = y_max - offset0;
  if (!(a0 > 0.0)) a0 = std::max(y_max, 1e-6);

  // b from a log-linear regression of the excess over the offset; falls back
  // to 1 (per unit) when fewer than two points sit above the offset.
  double b0 = 1.0;
  {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int k = 0;
    for (const auto& p : points) {
      const double excess = p.error_rate - offset0;
      if (excess <= 1e-6 * a0) continue;
      const double x = p.snr / snr_unit;
      sx += x;
      sy += std::log(excess);
      sxx += x * x;
      sxy += x * std::log(excess);
      ++k;
    }
    if (k >= 2) {
      const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
      if (slope < 0.0 && std::isfinite(slope)) b0 = -slope;
    }
  }

  const int n_params = free_offset ? 3 : 2;
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double off = free_offset ? x[2] : offset_value;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double w = weighted ? 1.0 / points[i].error_rate_uncertainty : 1.0;
      const double xi = points[i].snr / snr_unit;
      const double e = std::exp(-x[1] * xi);
      r[row] = w * (x[0] * e + off - points[i].error_rate);
      if (jac != nullptr) {
        (*jac)(row, 0) = w * e;
        (*jac)(row, 1) = -w * x[0] * xi * e;
        if (free_offset) (*jac)(row, 2) = w;
      }
    }
  };

  Eigen::VectorXd init(n_params);
  ParameterBounds bounds;
  bounds.lower.resize(n_params);
  bounds.upper.resize(n_params);
  init[0] = a0;
  init[1] = b0;
  bounds.lower[0] = 0.0;
  bounds.upper[0] = 1e3;
  bounds.lower[1] = 0.0;
  bounds.upper[1] = std::numeric_limits<double>::infinity();
  if (free_offset) {
    init[2] = offset0;
    bounds.lower[2] = 0.0;
    bounds.upper[2] = 100.0;
  }

  const LsqResult res = levenberg_marquardt(residual, init, static_cast<int>(n), LsqOptions{}, bounds);
  if (!res.converged || !res.covariance_valid) {
    std::ostringstream msg;
    msg << "SNR fit failed (" << res.message << ", covariance " << (res.covariance_valid ? "ok" : "singular")
        << ", A=" << res.params[0] << ", b=" << res.params[1] << ")";
    throw FitFailure(msg.str());
  }

  SnrFit fit;
  fit.a_coeff = res.params[0];
  fit.b_coeff = res.params[1];
  fit.offset = free_offset ? res.params[2] : offset_value;
  fit.offset_fitted = free_offset;
  fit.snr_unit = snr_unit;
  fit.weighted = weighted;
  fit.chi_square = res.chi_square;
  fit.dof = res.dof;
  fit.covariance = weighted ? res.covariance : Eigen::MatrixXd(res.covariance * res.reduced_chi_square());
  if (!(fit.a_coeff > 0.0) || !(fit.b_coeff > 0.0)) {
    throw FitFailure("SNR fit converged to a non-positive amplitude or rate");
  }
  return fit;
}

double required_snr(double target_error, const SnrFit& fit, bool include_offset) {
  const double floor = include_offset ? fit.offset : 0.0;
  if (!(target_error > floor)) {
    std::ostringstream msg;
    msg << "target error " << target_error << "% is at or below the achievable floor " << floor << "%";
    throw UnachievableTarget(msg.str());
  }
  const double excess = target_error - floor;
  if (excess >= fit.a_coeff) return 0.0;
  return std::log(fit.a_coeff / excess) / fit.b_coeff * fit.snr_unit;
}

ErrorBudget error_budget(Measured f_sim, Measured f_exp) {
  for (const auto& m : {f_sim, f_exp}) {
    if (!(m.value > 0.0 && m.value <= 100.0)) throw InvalidInput("fidelities must be in (0, 100] percent");
    if (!(m.uncertainty >= 0.0)) throw InvalidInput("uncertainties must be >= 0");
  }
  ErrorBudget b;
  b.f_sim = f_sim;
  b.f_exp = f_exp;
  b.eps_cor = {100.0 - f_sim.value, f_sim.uncertainty};
  b.eps_others = {f_sim.value - f_exp.value, std::hypot(f_sim.uncertainty, f_exp.uncertainty)};
  return b;
}

double runs_test_p_value(std::span<const double> residuals) {
  std::vector<int> signs;
  for (double r : residuals) {
    if (r > 0.0) signs.push_back(1);
    if (r < 0.0) signs.push_back(-1);
  }
  const int n1 = static_cast<int>(std::count(signs.begin(), signs.end(), 1));
  const int n2 = static_cast<int>(signs.size()) - n1;
  if (n1 == 0 || n2 == 0) return 1.0;  // only one arrangement exists
  int runs = 1;
  for (std::size_t i = 1; i < signs.size(); ++i) runs += signs[i] != signs[i - 1] ? 1 : 0;

  double below = 0.0, above = 0.0;
  for (int r = 2; r <= n1 + n2; ++r) {
    const double pr = runs_probability(r, n1, n2);
    if (r <= runs) below += pr;
    if (r >= runs) above += pr;
  }
  return std::min(1.0, 2.0 * std::min(below, above));
}

SnrSweepResult snr_sweep(const std::vector<double>& snr_values, const RbConfig& config, std::uint64_t seed,
                         double snr_unit) {
  if (snr_values.size() < 4) throw InvalidInput("SNR sweep needs at least four SNR values");
  for (double s : snr_values) {
    if (!(s > 0.0)) throw InvalidInput("SNR values must be positive");
  }
  auto to_point = [](double snr, const RbResult& rb) {
    if (!rb.fit_ok) throw FitFailure("RB fit failed at SNR " + std::to_string(snr) + ": " + rb.fit_message);
    return SnrFidelityPoint{snr, 100.0 * (1.0 - rb.fidelity), 100.0 * rb.fidelity_se};
  };

  SnrSweepResult out;
  RbConfig cfg = config;
  cfg.seed = seed;
  cfg.snr.reset();
  const RbResult baseline = run_rb(cfg);
  out.baseline = to_point(std::numeric_limits<double>::infinity(), baseline);

  for (double s : snr_values) {
    cfg.snr = s;
    out.rb_results.push_back(run_rb(cfg));
    out.points.push_back(to_point(s, out.rb_results.back()));
  }
  out.rb_results.insert(out.rb_results.begin(), baseline);

  out.fit = fit_snr_model(out.points, OffsetMode::kFixed, out.baseline.error_rate, snr_unit);
  std::vector<double> residuals;
  for (const auto& p : out.points) residuals.push_back(p.error_rate - out.fit.evaluate(p.snr));
  out.runs_test_p = runs_test_p_value(residuals);
  return out;
}

}  // namespace qnl
