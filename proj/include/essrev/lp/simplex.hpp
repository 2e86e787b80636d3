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

// Dense revised primal simplex with explicit variable bounds.
//
// Rows are turned into equalities A x - r = 0 with one logical variable r_i
// per row carrying [row_lower_i, row_upper_i]; box constraints on x stay as
// variable bounds. Phase 1 adds an artificial column on every row whose
// initial logical value falls outside its range and minimizes their sum.
// Pricing is Dantzig (largest reduced cost, lowest index on ties); after a
// run of degenerate pivots the solver switches to Bland's rule until the
// objective moves again.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "essrev/errors.hpp"
#include "essrev/lp/problem.hpp"

namespace essrev::lp {

struct SolverOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;  // relative to max |c| in phase 2
  double pivot_tol = 1e-11;
  int stall_threshold = 50;
  int refactor_interval = 64;
  std::int64_t max_iterations = 0;  // 0 picks a size-based limit
};

namespace detail {

enum class VarState : std::uint8_t { basic, at_lower, at_upper, free_zero };

class BoundedSimplex {
 public:
  BoundedSimplex(const LpProblem& p, const SolverOptions& opt) : p_(p), opt_(opt) {
    m_ = p.num_rows();
    n_ = p.num_cols();
  }

  LpSolution run() {
    LpSolution out;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (p_.row_lower[i] > p_.row_upper[i] || p_.row_lower[i] == kInf ||
          p_.row_upper[i] == -kInf) {
        out.status = LpStatus::infeasible;
        return out;
      }
    }
    initialize();
    max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations
                                              : 200 * (m_ + total_) + 10000;

    if (num_artificial_ > 0) {
      set_phase_costs(true);
      iterate(true);
      double infeasibility = 0.0;
      for (Eigen::Index j = n_ + m_; j < total_; ++j) infeasibility += x_[j];
      double scale = 1.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (std::isfinite(p_.row_lower[i])) scale = std::max(scale, std::abs(p_.row_lower[i]));
        if (std::isfinite(p_.row_upper[i])) scale = std::max(scale, std::abs(p_.row_upper[i]));
      }
      if (infeasibility > opt_.feasibility_tol * scale) {
        out.status = LpStatus::infeasible;
        out.iterations = iterations_;
        return out;
      }
      retire_artificials();
    }

    set_phase_costs(false);
    if (!iterate(false)) {
      out.status = LpStatus::unbounded;
      out.iterations = iterations_;
      return out;
    }
    refactor();

    out.status = LpStatus::optimal;
    out.iterations = iterations_;
    out.primal_values = Eigen::Map<const Eigen::VectorXd>(x_.data(), n_);
    out.objective_value = p_.objective.dot(out.primal_values);
    Eigen::VectorXd cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
    // Internal costs are -c, so the maximization's row multipliers flip sign.
    out.dual_values = -(binv_.transpose() * cb);
    out.reduced_costs = p_.objective - p_.constraints.transpose() * out.dual_values;
    return out;
  }

 private:
  bool is_artificial(Eigen::Index j) const { return j >= n_ + m_; }

  void initialize() {
    // Nonbasic structurals sit at a finite bound, or at zero when free.
    std::vector<double> xs(static_cast<std::size_t>(n_));
    std::vector<VarState> ss(static_cast<std::size_t>(n_));
    for (Eigen::Index j = 0; j < n_; ++j) {
      const double l = p_.var_lower[j], u = p_.var_upper[j];
      if (std::isfinite(l)) {
        xs[j] = l;
        ss[j] = VarState::at_lower;
      } else if (std::isfinite(u)) {
        xs[j] = u;
        ss[j] = VarState::at_upper;
      } else {
        xs[j] = 0.0;
        ss[j] = VarState::free_zero;
      }
    }
    const Eigen::VectorXd activity =
        p_.constraints * Eigen::Map<const Eigen::VectorXd>(xs.data(), n_);

    std::vector<Eigen::Index> violated;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (activity[i] < p_.row_lower[i] - opt_.feasibility_tol ||
          activity[i] > p_.row_upper[i] + opt_.feasibility_tol)
        violated.push_back(i);
    }
    num_artificial_ = static_cast<Eigen::Index>(violated.size());
    total_ = n_ + m_ + num_artificial_;
    lo_.assign(total_, 0.0);
    up_.assign(total_, 0.0);
    x_.assign(total_, 0.0);
    cost_.assign(total_, 0.0);
    state_.assign(total_, VarState::at_lower);
    art_row_.assign(num_artificial_, 0);
    art_sign_.assign(num_artificial_, 1.0);
    head_.assign(m_, 0);
    binv_ = Eigen::MatrixXd::Zero(m_, m_);

    for (Eigen::Index j = 0; j < n_; ++j) {
      lo_[j] = p_.var_lower[j];
      up_[j] = p_.var_upper[j];
      x_[j] = xs[j];
      state_[j] = ss[j];
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index r = n_ + i;
      lo_[r] = p_.row_lower[i];
      up_[r] = p_.row_upper[i];
      head_[i] = r;
      state_[r] = VarState::basic;
      x_[r] = activity[i];
      binv_(i, i) = -1.0;  // logical column is -e_i
    }
    for (Eigen::Index k = 0; k < num_artificial_; ++k) {
      const Eigen::Index i = violated[k];
      const Eigen::Index r = n_ + i;
      const Eigen::Index a = n_ + m_ + k;
      const bool below = activity[i] < p_.row_lower[i];
      // Logical leaves at the violated bound; the artificial absorbs the residual.
      x_[r] = below ? p_.row_lower[i] : p_.row_upper[i];
      state_[r] = below ? VarState::at_lower : VarState::at_upper;
      art_row_[k] = i;
      art_sign_[k] = below ? 1.0 : -1.0;
      lo_[a] = 0.0;
      up_[a] = kInf;
      x_[a] = std::abs(activity[i] - x_[r]);
      state_[a] = VarState::basic;
      head_[i] = a;
      binv_(i, i) = art_sign_[k];
    }
  }

  void set_phase_costs(bool phase1) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    if (phase1) {
      for (Eigen::Index j = n_ + m_; j < total_; ++j) cost_[j] = 1.0;
      cost_scale_ = 1.0;
    } else {
      for (Eigen::Index j = 0; j < n_; ++j) cost_[j] = -p_.objective[j];
      const double cmax = n_ > 0 ? p_.objective.cwiseAbs().maxCoeff() : 0.0;
      cost_scale_ = cmax > 0.0 ? cmax : 1.0;
    }
  }

  // alpha = B^-1 a_j
  Eigen::VectorXd ftran(Eigen::Index j) const {
    if (j < n_) return binv_ * p_.constraints.col(j);
    if (j < n_ + m_) return -binv_.col(j - n_);
    const Eigen::Index k = j - n_ - m_;
    return art_sign_[k] * binv_.col(art_row_[k]);
  }

  double column_dot(const Eigen::VectorXd& y, Eigen::Index j) const {
    if (j < n_) return y.dot(p_.constraints.col(j));
    if (j < n_ + m_) return -y[j - n_];
    const Eigen::Index k = j - n_ - m_;
    return art_sign_[k] * y[art_row_[k]];
  }

  void refactor() {
    if (m_ == 0) return;
    Eigen::MatrixXd basis(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = head_[i];
      basis.col(i).setZero();
      if (j < n_) {
        basis.col(i) = p_.constraints.col(j);
      } else if (j < n_ + m_) {
        basis(j - n_, i) = -1.0;
      } else {
        const Eigen::Index k = j - n_ - m_;
        basis(art_row_[k], i) = art_sign_[k];
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    if (!(lu.rcond() > 1e-14)) throw NumericError("basis matrix became singular");
    binv_ = lu.inverse();

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (Eigen::Index j = 0; j < total_; ++j) {
      if (state_[j] == VarState::basic || x_[j] == 0.0) continue;
      if (j < n_) {
        rhs -= p_.constraints.col(j) * x_[j];
      } else if (j < n_ + m_) {
        rhs[j - n_] += x_[j];
      } else {
        const Eigen::Index k = j - n_ - m_;
        rhs[art_row_[k]] -= art_sign_[k] * x_[j];
      }
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (Eigen::Index i = 0; i < m_; ++i) x_[head_[i]] = xb[i];
    if (!xb.allFinite()) throw NumericError("non-finite basic solution");
    pivots_since_refactor_ = 0;
  }

  // Returns false when the phase objective is unbounded.
  bool iterate(bool phase1) {
    int stall = 0;
    Eigen::VectorXd cb(m_);
    while (true) {
      if (iterations_ >= max_iterations_)
        throw NumericError("simplex iteration limit reached");
      const bool bland = stall >= opt_.stall_threshold;

      for (Eigen::Index i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
      const Eigen::VectorXd y = binv_.transpose() * cb;
      const double dtol = opt_.optimality_tol * cost_scale_;

      Eigen::Index entering = -1;
      double dir = 0.0;
      double best = 0.0;
      for (Eigen::Index j = 0; j < total_; ++j) {
        const VarState s = state_[j];
        if (s == VarState::basic || lo_[j] == up_[j]) continue;
        const double d = cost_[j] - column_dot(y, j);
        double candidate_dir = 0.0;
        if (d < -dtol && (s == VarState::at_lower || s == VarState::free_zero)) {
          candidate_dir = 1.0;
        } else if (d > dtol && (s == VarState::at_upper || s == VarState::free_zero)) {
          candidate_dir = -1.0;
        }
        if (candidate_dir == 0.0) continue;
        if (bland) {
          entering = j;
          dir = candidate_dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          dir = candidate_dir;
        }
      }
      if (entering < 0) return true;

      const Eigen::VectorXd alpha = ftran(entering);

      double theta = kInf;
      Eigen::Index leave = -1;
      bool leave_upper = false;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = alpha[i];
        if (std::abs(a) <= opt_.pivot_tol) continue;
        const double rate = -dir * a;
        const Eigen::Index b = head_[i];
        double ratio;
        bool to_upper;
        if (rate < 0.0) {
          if (!std::isfinite(lo_[b])) continue;
          ratio = (x_[b] - lo_[b]) / -rate;
          to_upper = false;
        } else {
          if (!std::isfinite(up_[b])) continue;
          ratio = (up_[b] - x_[b]) / rate;
          to_upper = true;
        }
        ratio = std::max(ratio, 0.0);
        const double tie = 1e-12 * std::max(1.0, std::isfinite(theta) ? theta : 1.0);
        bool take = false;
        if (leave < 0 || ratio < theta - tie) {
          take = true;
        } else if (ratio <= theta + tie) {
          if (bland) {
            take = b < head_[leave];
          } else {
            const double cur = std::abs(alpha[leave]);
            take = std::abs(a) > cur || (std::abs(a) == cur && b < head_[leave]);
          }
        }
        if (take) {
          leave = i;
          leave_upper = to_upper;
          theta = ratio;
        }
      }

      const double flip = up_[entering] - lo_[entering];  // inf for half-bounded or free
      ++iterations_;
      if (std::isfinite(flip) && flip <= theta) {
        x_[entering] += dir * flip;
        for (Eigen::Index i = 0; i < m_; ++i) x_[head_[i]] -= dir * flip * alpha[i];
        state_[entering] = dir > 0 ? VarState::at_upper : VarState::at_lower;
        x_[entering] = dir > 0 ? up_[entering] : lo_[entering];
        stall = flip > 1e-12 ? 0 : stall + 1;
        continue;
      }
      if (leave < 0) {
        if (phase1) throw NumericError("phase-1 objective reported unbounded");
        return false;
      }

      for (Eigen::Index i = 0; i < m_; ++i) x_[head_[i]] -= dir * theta * alpha[i];
      x_[entering] += dir * theta;
      const Eigen::Index leaving = head_[leave];
      x_[leaving] = leave_upper ? up_[leaving] : lo_[leaving];
      state_[leaving] = leave_upper ? VarState::at_upper : VarState::at_lower;
      if (is_artificial(leaving)) up_[leaving] = 0.0;  // never re-enters
      state_[entering] = VarState::basic;
      head_[leave] = entering;
      pivot_update(leave, alpha);
      stall = theta > 1e-12 ? 0 : stall + 1;
      if (!std::isfinite(x_[entering])) throw NumericError("non-finite iterate");
    }
  }

  void pivot_update(Eigen::Index row, const Eigen::VectorXd& alpha) {
    const double piv = alpha[row];
    binv_.row(row) /= piv;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == row || alpha[i] == 0.0) continue;
      binv_.row(i) -= alpha[i] * binv_.row(row);
    }
    if (++pivots_since_refactor_ >= opt_.refactor_interval) refactor();
  }

  // Fix artificials at zero and pivot basic ones out where a replacement exists.
  void retire_artificials() {
    for (Eigen::Index j = n_ + m_; j < total_; ++j) {
      lo_[j] = 0.0;
      up_[j] = 0.0;
      if (state_[j] != VarState::basic) {
        state_[j] = VarState::at_lower;
        x_[j] = 0.0;
      }
    }
    for (Eigen::Index pos = 0; pos < m_; ++pos) {
      if (!is_artificial(head_[pos])) continue;
      const Eigen::VectorXd row = binv_.row(pos);
      for (Eigen::Index j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::basic) continue;
        if (std::abs(column_dot(row, j)) <= 1e-7) continue;
        const Eigen::VectorXd alpha = ftran(j);
        const Eigen::Index art = head_[pos];
        state_[art] = VarState::at_lower;
        x_[art] = 0.0;
        state_[j] = VarState::basic;
        head_[pos] = j;
        pivot_update(pos, alpha);
        break;
      }
    }
    refactor();
  }

  const LpProblem& p_;
  SolverOptions opt_;
  Eigen::Index m_ = 0, n_ = 0, total_ = 0, num_artificial_ = 0;
  std::vector<double> lo_, up_, x_, cost_;
  std::vector<VarState> state_;
  std::vector<Eigen::Index> head_;
  std::vector<Eigen::Index> art_row_;
  std::vector<double> art_sign_;
  Eigen::MatrixXd binv_;
  double cost_scale_ = 1.0;
  std::int64_t iterations_ = 0;
  std::int64_t max_iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

}  // namespace detail

/// Solves `problem` (maximization). Deterministic for identical input.
inline LpSolution solve(const LpProblem& problem, const SolverOptions& options = {}) {
  validate_structure(problem);
  return detail::BoundedSimplex(problem, options).run();
}

}  // namespace essrev::lp
