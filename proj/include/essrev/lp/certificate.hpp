// Copyright 2026 The essrev Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "essrev/errors.hpp"
#include "essrev/lp/problem.hpp"

namespace essrev::lp {

/// Optimality evidence for a claimed optimal solution, recomputed from the
/// problem data alone. Residuals are absolute; `passed` compares each one
/// against `tolerance` times its scale.
struct CertificateReport {
  double max_primal_violation = 0.0;  // bound or row-range excess
  double max_dual_violation = 0.0;    // stationarity residual or multiplier on an infinite bound
  double complementary_slackness = 0.0;
  double duality_gap = 0.0;           // dual_bound - c'x
  double dual_bound = 0.0;
  double primal_scale = 1.0;
  double dual_scale = 1.0;
  double objective_scale = 1.0;
  double tolerance = 1e-7;
  bool passed = false;
};

inline CertificateReport verify_certificate(const LpProblem& problem, const LpSolution& solution,
                                            double tolerance = 1e-7) {
  if (solution.status != LpStatus::optimal)
    throw ContractError("certificate requested for a solution with status " +
                        std::string(to_string(solution.status)));
  validate_structure(problem);
  const auto m = problem.num_rows();
  const auto n = problem.num_cols();
  if (solution.primal_values.size() != n || solution.dual_values.size() != m)
    throw ContractError("solution vectors do not match the problem dimensions");

  const Eigen::VectorXd& x = solution.primal_values;
  const Eigen::VectorXd& y = solution.dual_values;
  const Eigen::VectorXd activity = problem.constraints * x;
  const Eigen::VectorXd z = problem.objective - problem.constraints.transpose() * y;

  CertificateReport rep;
  rep.tolerance = tolerance;

  double primal = 0.0;
  double cs = 0.0;
  double dual = 0.0;
  double bound = 0.0;
  // One bounded quantity v in [lo, up] carrying multiplier w (w > 0 pushes
  // against the upper bound, w < 0 against the lower one).
  auto account = [&](double v, double lo, double up, double w) {
    primal = std::max({primal, lo - v, v - up});
    if (w > 0.0) {
      if (!std::isfinite(up)) {
        dual = std::max(dual, w);
      } else {
        bound += w * up;
        cs = std::max(cs, w * std::abs(up - v));
      }
    } else if (w < 0.0) {
      if (!std::isfinite(lo)) {
        dual = std::max(dual, -w);
      } else {
        bound += w * lo;
        cs = std::max(cs, -w * std::abs(v - lo));
      }
    }
  };
  for (Eigen::Index j = 0; j < n; ++j)
    account(x[j], problem.var_lower[j], problem.var_upper[j], z[j]);
  for (Eigen::Index i = 0; i < m; ++i)
    account(activity[i], problem.row_lower[i], problem.row_upper[i], y[i]);

  // z is derived from y, so stationarity only fails if the solver's reduced
  // costs disagree with it.
  if (solution.reduced_costs.size() == n)
    dual = std::max(dual, (solution.reduced_costs - z).cwiseAbs().maxCoeff());

  const double cx = problem.objective.dot(x);
  rep.max_primal_violation = std::max(primal, 0.0);
  rep.max_dual_violation = dual;
  rep.complementary_slackness = cs;
  rep.dual_bound = bound;
  rep.duality_gap = bound - cx;

  double xmax = n > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
  if (m > 0) xmax = std::max(xmax, activity.cwiseAbs().maxCoeff());
  rep.primal_scale = 1.0 + xmax;
  rep.dual_scale = 1.0 + (n > 0 ? problem.objective.cwiseAbs().maxCoeff() : 0.0);
  rep.objective_scale = 1.0 + std::abs(cx);

  rep.passed = std::isfinite(bound) &&
               rep.max_primal_violation <= tolerance * rep.primal_scale &&
               rep.max_dual_violation <= tolerance * rep.dual_scale &&
               rep.complementary_slackness <= tolerance * rep.objective_scale &&
               std::abs(rep.duality_gap) <= tolerance * rep.objective_scale &&
               std::abs(solution.objective_value - cx) <= tolerance * rep.objective_scale;
  return rep;
}

}  // namespace essrev::lp
