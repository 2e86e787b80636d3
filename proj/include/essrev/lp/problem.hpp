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

/*! \file
 *  \brief Bounded-variable linear programs in row-range form.
 *
 *  maximize    c'x
 *  subject to  row_lower <= A x <= row_upper
 *              var_lower <=  x  <= var_upper
 *
 *  Infinite bounds are expressed with +/- std::numeric_limits<double>::infinity().
 */

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "essrev/errors.hpp"

namespace essrev::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpProblem {
  Eigen::VectorXd objective;    // maximized
  Eigen::MatrixXd constraints;  // rows x cols, dense
  Eigen::VectorXd row_lower;
  Eigen::VectorXd row_upper;
  Eigen::VectorXd var_lower;
  Eigen::VectorXd var_upper;
  std::vector<std::string> row_names;  // optional, empty or one per row
  std::vector<std::string> col_names;  // optional, empty or one per column

  Eigen::Index num_rows() const { return constraints.rows(); }
  Eigen::Index num_cols() const { return constraints.cols(); }

  std::string row_name(Eigen::Index i) const {
    return row_names.empty() ? "r" + std::to_string(i) : row_names[static_cast<std::size_t>(i)];
  }
  std::string col_name(Eigen::Index j) const {
    return col_names.empty() ? "x" + std::to_string(j) : col_names[static_cast<std::size_t>(j)];
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd primal_values;
  double objective_value = 0.0;
  Eigen::VectorXd dual_values;    // one per row, sign convention of the maximization
  Eigen::VectorXd reduced_costs;  // c - A'y
  std::int64_t iterations = 0;
};

/// Checks the structural invariants of `p`. Throws StructuralError for
/// shape mismatches, NaNs or crossed variable bounds, and NumericError for
/// infinite objective or matrix coefficients.
inline void validate_structure(const LpProblem& p) {
  const auto m = p.num_rows();
  const auto n = p.num_cols();
  auto fail = [](const std::string& what) { throw StructuralError(what); };
  if (p.row_lower.size() != m || p.row_upper.size() != m)
    fail("row bound vectors must have " + std::to_string(m) + " entries");
  if (p.objective.size() != n || p.var_lower.size() != n || p.var_upper.size() != n)
    fail("objective and variable bounds must have " + std::to_string(n) + " entries");
  if (!p.row_names.empty() && static_cast<Eigen::Index>(p.row_names.size()) != m)
    fail("row_names must be empty or have one label per row");
  if (!p.col_names.empty() && static_cast<Eigen::Index>(p.col_names.size()) != n)
    fail("col_names must be empty or have one label per column");
  if (p.constraints.hasNaN() || p.objective.hasNaN() || p.row_lower.hasNaN() ||
      p.row_upper.hasNaN() || p.var_lower.hasNaN() || p.var_upper.hasNaN())
    fail("problem contains NaN entries");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (p.var_lower[j] > p.var_upper[j])
      fail("variable " + p.col_name(j) + " has lower bound above upper bound");
    if (p.var_lower[j] == kInf || p.var_upper[j] == -kInf)
      fail("variable " + p.col_name(j) + " has an empty bound interval");
  }
  if (!p.constraints.allFinite() || !p.objective.allFinite())
    throw NumericError("objective or constraint coefficients are not finite");
}

namespace detail {
inline void write_number(std::ostream& os, double v) {
  if (v == kInf) {
    os << "inf";
  } else if (v == -kInf) {
    os << "-inf";
  } else {
    os << v;
  }
}
}  // namespace detail

/// Plain-text listing of `p`, one constraint per line, for bug reports.
inline void write_listing(std::ostream& os, const LpProblem& p) {
  const auto old_precision = os.precision(17);
  os << "MAXIMIZE\n  obj:";
  bool any = false;
  for (Eigen::Index j = 0; j < p.num_cols(); ++j) {
    if (p.objective[j] == 0.0) continue;
    os << ' ' << (p.objective[j] < 0 ? "- " : (any ? "+ " : "")) << std::abs(p.objective[j])
       << ' ' << p.col_name(j);
    any = true;
  }
  if (!any) os << " 0";
  os << "\nSUBJECT TO\n";
  for (Eigen::Index i = 0; i < p.num_rows(); ++i) {
    os << "  " << p.row_name(i) << ": ";
    detail::write_number(os, p.row_lower[i]);
    os << " <=";
    bool first = true;
    for (Eigen::Index j = 0; j < p.num_cols(); ++j) {
      const double a = p.constraints(i, j);
      if (a == 0.0) continue;
      os << ' ' << (a < 0 ? "- " : (first ? "" : "+ ")) << std::abs(a) << ' ' << p.col_name(j);
      first = false;
    }
    if (first) os << " 0";
    os << " <= ";
    detail::write_number(os, p.row_upper[i]);
    os << '\n';
  }
  os << "BOUNDS\n";
  for (Eigen::Index j = 0; j < p.num_cols(); ++j) {
    os << "  ";
    detail::write_number(os, p.var_lower[j]);
    os << " <= " << p.col_name(j) << " <= ";
    detail::write_number(os, p.var_upper[j]);
    os << '\n';
  }
  os << "END\n";
  os.precision(old_precision);
}

inline std::string listing(const LpProblem& p) {
  std::ostringstream os;
  write_listing(os, p);
  return os.str();
}

}  // namespace essrev::lp
