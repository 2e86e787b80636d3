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

// Test-only LP helpers: a brute-force vertex enumerator used as an
// independent oracle, and a generator of random feasible boxed instances.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "essrev/lp/problem.hpp"

namespace essrev::testing {

// Maximum of c'x over all vertices of the feasible region, found by solving
// every n-subset of active hyperplanes. Only meant for n <= 4.
inline std::optional<double> enumerate_vertices(const lp::LpProblem& p, double tol = 1e-9) {
  const auto n = p.num_cols();
  const auto m = p.num_rows();
  std::vector<Eigen::VectorXd> normals;
  std::vector<double> rhs;
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    if (std::isfinite(p.var_lower[j])) normals.push_back(e), rhs.push_back(p.var_lower[j]);
    if (std::isfinite(p.var_upper[j])) normals.push_back(e), rhs.push_back(p.var_upper[j]);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::VectorXd a = p.constraints.row(i).transpose();
    if (std::isfinite(p.row_lower[i])) normals.push_back(a), rhs.push_back(p.row_lower[i]);
    if (std::isfinite(p.row_upper[i])) normals.push_back(a), rhs.push_back(p.row_upper[i]);
  }
  const auto h = static_cast<int>(normals.size());
  std::optional<double> best;
  std::vector<int> pick(static_cast<std::size_t>(n));
  // Iterate over all n-combinations of the h hyperplanes.
  std::vector<bool> mask(static_cast<std::size_t>(h), false);
  if (n == 0 || h < n) return best;
  std::fill(mask.begin(), mask.begin() + n, true);
  do {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    Eigen::Index r = 0;
    for (int k = 0; k < h; ++k) {
      if (!mask[k]) continue;
      a.row(r) = normals[k].transpose();
      b[r] = rhs[k];
      ++r;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(b);
    bool feasible = true;
    for (Eigen::Index j = 0; j < n && feasible; ++j)
      feasible = x[j] >= p.var_lower[j] - tol && x[j] <= p.var_upper[j] + tol;
    const Eigen::VectorXd act = p.constraints * x;
    for (Eigen::Index i = 0; i < m && feasible; ++i)
      feasible = act[i] >= p.row_lower[i] - tol && act[i] <= p.row_upper[i] + tol;
    if (!feasible) continue;
    const double v = p.objective.dot(x);
    if (!best || v > *best) best = v;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

// Feasible instance with every variable boxed: rows are built around an
// interior point x0 so the feasible set is non-empty.
inline lp::LpProblem random_boxed_lp(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> coef(-10.0, 10.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  lp::LpProblem p;
  p.objective.resize(n);
  p.var_lower.resize(n);
  p.var_upper.resize(n);
  Eigen::VectorXd x0(n);
  for (int j = 0; j < n; ++j) {
    p.objective[j] = coef(rng);
    p.var_lower[j] = -5.0 * unit(rng);
    p.var_upper[j] = p.var_lower[j] + 10.0 * unit(rng);
    x0[j] = p.var_lower[j] + unit(rng) * (p.var_upper[j] - p.var_lower[j]);
  }
  p.constraints = Eigen::MatrixXd::Zero(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (unit(rng) < 0.6) p.constraints(i, j) = std::round(coef(rng) * 4.0) / 4.0;
  const Eigen::VectorXd act = p.constraints * x0;
  p.row_lower.resize(m);
  p.row_upper.resize(m);
  for (int i = 0; i < m; ++i) {
    const double kind = unit(rng);
    if (kind < 0.15) {
      p.row_lower[i] = p.row_upper[i] = act[i];
    } else if (kind < 0.55) {
      p.row_lower[i] = -lp::kInf;
      p.row_upper[i] = act[i] + 5.0 * unit(rng);
    } else if (kind < 0.8) {
      p.row_lower[i] = act[i] - 5.0 * unit(rng);
      p.row_upper[i] = lp::kInf;
    } else {
      p.row_lower[i] = act[i] - 3.0 * unit(rng);
      p.row_upper[i] = act[i] + 3.0 * unit(rng);
    }
  }
  return p;
}

}  // namespace essrev::testing
