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

#include "qnl/lsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qnl {

namespace {

Eigen::VectorXd project(Eigen::VectorXd x, const std::optional<ParameterBounds>& bounds) {
  if (bounds) x = x.cwiseMax(bounds->lower).cwiseMin(bounds->upper);
  return x;
}

void evaluate(const ResidualFunction& fn, const Eigen::VectorXd& x, int m, bool analytic, Eigen::VectorXd& r,
              Eigen::MatrixXd& jac) {
  r.resize(m);
  jac.resize(m, x.size());
  if (analytic) {
    fn(x, r, &jac);
    return;
  }
  fn(x, r, nullptr);
  Eigen::VectorXd rp(m), rm(m);
  for (int j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(std::abs(x[j]), 1e-6);
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    fn(xp, rp, nullptr);
    fn(xm, rm, nullptr);
    jac.col(j) = (rp - rm) / (2.0 * h);
  }
}

}  // namespace

LsqResult levenberg_marquardt(const ResidualFunction& fn, Eigen::VectorXd initial, int residual_count,
                              const LsqOptions& options, const std::optional<ParameterBounds>& bounds) {
  const int n = static_cast<int>(initial.size());
  const int m = residual_count;
  LsqResult result;
  result.dof = m - n;
  if (m < n) {
    result.message = "fewer residuals than parameters";
    result.params = initial;
    return result;
  }

  Eigen::VectorXd x = project(std::move(initial), bounds);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  evaluate(fn, x, m, options.analytic_jacobian, r, jac);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) {
    result.params = x;
    result.message = "non-finite residuals at the initial point";
    return result;
  }

  double lambda = options.initial_lambda;
  const double xtol = std::max(options.relative_tolerance, 1e-14);
  Eigen::VectorXd r_new;
  Eigen::MatrixXd jac_new;

  int iter = 0;
  for (; iter < options.max_iterations && !result.converged; ++iter) {
    if (cost <= 1e-30 * std::max(1, m)) {
      result.converged = true;
      result.message = "zero residual";
      break;
    }
    Eigen::MatrixXd a = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * r;
    Eigen::VectorXd diag = a.diagonal();
    const double diag_floor = std::max(diag.maxCoeff(), 1e-300) * 1e-12;
    diag = diag.cwiseMax(diag_floor);
    // Parameters sitting on a bound with the gradient pushing outward are
    // frozen for this iteration; projecting their steps only crawls.
    if (bounds) {
      for (int j = 0; j < n; ++j) {
        const bool at_lower = x[j] <= bounds->lower[j] && g[j] > 0.0;
        const bool at_upper = x[j] >= bounds->upper[j] && g[j] < 0.0;
        if (at_lower || at_upper) {
          a.row(j).setZero();
          a.col(j).setZero();
          a(j, j) = diag[j];
          g[j] = 0.0;
        }
      }
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      if (!delta.allFinite()) {
        lambda *= 10.0;
      } else {
        const Eigen::VectorXd x_new = project(x + delta, bounds);
        evaluate(fn, x_new, m, options.analytic_jacobian, r_new, jac_new);
        const double cost_new = r_new.squaredNorm();
        if (std::isfinite(cost_new) && cost_new <= cost) {
          const double step = (x_new - x).norm();
          const double decrease = cost - cost_new;
          x = x_new;
          r = r_new;
          jac = jac_new;
          cost = cost_new;
          lambda = std::max(lambda * 0.1, 1e-15);
          accepted = true;
          if (step <= xtol * (x.norm() + xtol) || decrease <= options.relative_tolerance * cost) {
            result.converged = true;
            result.message = "converged";
          }
        } else {
          lambda *= 10.0;
        }
      }
      if (!accepted && lambda > 1e20) {
        // No downhill step exists at working precision: a stationary point.
        result.converged = true;
        result.message = "stationary";
        break;
      }
    }
  }
  if (!result.converged) result.message = "iteration limit reached";

  result.iterations = iter;
  result.params = x;
  result.chi_square = cost;
  // Invert J^T J after equilibrating its diagonal so that parameters of very
  // different magnitude do not trip the rank test.
  const Eigen::MatrixXd a = jac.transpose() * jac;
  Eigen::VectorXd s = a.diagonal().cwiseMax(1e-300).cwiseSqrt();
  const Eigen::MatrixXd scaled = s.cwiseInverse().asDiagonal() * a * s.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-13);
  if (a.diagonal().minCoeff() > 0.0 && qr.rank() == n) {
    result.covariance = s.cwiseInverse().asDiagonal() * Eigen::MatrixXd(qr.inverse()) * s.cwiseInverse().asDiagonal();
    result.covariance_valid = result.covariance.allFinite();
  } else {
    result.covariance = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  }
  return result;
}

}  // namespace qnl
