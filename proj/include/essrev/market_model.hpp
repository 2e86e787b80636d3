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
 *  \brief Daily-horizon revenue models for a price-taking storage device.
 *
 *  Arbitrage mode:
 *    max  sum_t w_t lambda_t (qd_t - qr_t)
 *    s.t. s_{t+1} = eta_s s_t + eta_c qr_t - qd_t
 *         0 <= s_t <= S,   qr_t + qd_t <= Q dt
 *
 *  Joint mode adds a regulation capacity bid qreg_t:
 *    max  sum_t w_t [ lambda_t (qd_t - qr_t + (dru_t - drd_t) qreg_t)
 *                     + lambda^c_t qreg_t (1 - penalty (1 - gamma_t)) ]
 *    s.t. s_{t+1} = eta_s s_t + eta_c qr_t - qd_t + eta_c drd_t qreg_t - dru_t qreg_t
 *         0 <= s_t <= S,   qr_t + qd_t + qreg_t <= Q dt
 *
 *  with w_t = exp(-R t) on the 0-based step index (w_t = 1 when R = 0).
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "essrev/device.hpp"
#include "essrev/errors.hpp"
#include "essrev/lp/certificate.hpp"
#include "essrev/lp/problem.hpp"
#include "essrev/lp/simplex.hpp"
#include "essrev/prices.hpp"

namespace essrev {

enum class Mode { arbitrage, joint };
enum class TerminalPolicy { free, return_to_start };

inline const char* to_string(Mode m) { return m == Mode::arbitrage ? "arbitrage" : "joint"; }
inline const char* to_string(TerminalPolicy p) {
  return p == TerminalPolicy::free ? "free" : "return-to-start";
}
inline std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "arbitrage") return Mode::arbitrage;
  if (s == "joint") return Mode::joint;
  return std::nullopt;
}
inline std::optional<TerminalPolicy> parse_terminal_policy(const std::string& s) {
  if (s == "free") return TerminalPolicy::free;
  if (s == "return-to-start") return TerminalPolicy::return_to_start;
  return std::nullopt;
}

// Defaults applied when no regulation series is supplied. They are
// placeholders that make joint mode runnable, not measured values.
inline constexpr double kDefaultDeltaUp = 0.1;
inline constexpr double kDefaultDeltaDown = 0.1;
inline constexpr double kDefaultPerformance = 0.95;
inline constexpr double kPenaltyFactor = 1.1;

struct RegulationParams {
  std::vector<double> delta_ru;  // fraction of the bid deployed upward
  std::vector<double> delta_rd;  // fraction of the bid deployed downward
  std::vector<double> gamma;     // performance score
  double penalty_factor = kPenaltyFactor;
  std::optional<std::vector<double>> mileage_beta;  // carried, unused by the models

  static RegulationParams uniform(std::size_t steps, double ru = kDefaultDeltaUp,
                                  double rd = kDefaultDeltaDown,
                                  double gamma = kDefaultPerformance,
                                  double penalty = kPenaltyFactor) {
    return {std::vector<double>(steps, ru), std::vector<double>(steps, rd),
            std::vector<double>(steps, gamma), penalty, std::nullopt};
  }

  /// Net revenue coefficient of one unit of capacity bid at the capacity price.
  double capacity_coefficient(std::size_t t) const {
    return 1.0 - penalty_factor * (1.0 - gamma[t]);
  }
};

struct HorizonProblem {
  DeviceSpec device;
  PriceSeries prices;
  std::optional<RegulationParams> reg;
  double dt_hours = 1.0;
  double discount_rate = 0.0;  // per step
  Mode mode = Mode::arbitrage;
  TerminalPolicy terminal = TerminalPolicy::free;

  std::size_t horizon() const { return prices.size(); }
  double weight(std::size_t t) const {
    return discount_rate == 0.0 ? 1.0 : std::exp(-discount_rate * static_cast<double>(t));
  }
};

/// Throws ConstructionError when `hp` cannot be turned into a model.
inline void validate(const HorizonProblem& hp) {
  auto fail = [](const std::string& what) { throw ConstructionError(what); };
  const auto dev = validate(hp.device);
  if (!dev.valid()) fail("invalid device: " + dev.errors.front());
  const std::size_t T = hp.horizon();
  if (T == 0) fail("horizon must contain at least one step");
  if (hp.prices.lmp.size() != T) fail("price series length does not match the horizon");
  for (double v : hp.prices.lmp)
    if (!std::isfinite(v)) fail("energy prices must be finite");
  if (!(hp.dt_hours > 0.0) || !std::isfinite(hp.dt_hours)) fail("step length must be positive");
  if (!(hp.discount_rate >= 0.0) || !std::isfinite(hp.discount_rate))
    fail("discount rate must be a finite non-negative number");
  if (hp.mode != Mode::joint) return;
  if (!hp.prices.rcp) fail("regulation capacity price required for joint mode");
  for (double v : *hp.prices.rcp)
    if (!std::isfinite(v)) fail("regulation capacity prices must be finite");
  if (!hp.reg) fail("regulation parameters required for joint mode");
  const auto& r = *hp.reg;
  if (r.delta_ru.size() != T || r.delta_rd.size() != T || r.gamma.size() != T)
    fail("regulation series must match the horizon length");
  if (r.mileage_beta && r.mileage_beta->size() != T)
    fail("mileage ratio series must match the horizon length");
  auto unit = [&](const std::vector<double>& v, const char* what) {
    for (double x : v)
      if (!(x >= 0.0 && x <= 1.0)) fail(std::string(what) + " must lie in [0, 1]");
  };
  unit(r.delta_ru, "regulation-up fraction");
  unit(r.delta_rd, "regulation-down fraction");
  unit(r.gamma, "performance score");
  if (!(r.penalty_factor >= 0.0) || !std::isfinite(r.penalty_factor))
    fail("penalty factor must be non-negative");
}

/// Column/row positions of the model variables.
struct ModelLayout {
  std::size_t steps = 0;
  bool joint = false;
  bool terminal_row = false;

  std::size_t per_step() const { return joint ? 4 : 3; }
  Eigen::Index qr(std::size_t t) const { return static_cast<Eigen::Index>(t * per_step()); }
  Eigen::Index qd(std::size_t t) const { return qr(t) + 1; }
  Eigen::Index qreg(std::size_t t) const { return qr(t) + 2; }
  /// Column of s_{t+1}.
  Eigen::Index soc_next(std::size_t t) const {
    return qr(t) + static_cast<Eigen::Index>(per_step()) - 1;
  }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(steps * per_step()); }
  Eigen::Index soc_row(std::size_t t) const { return static_cast<Eigen::Index>(t); }
  Eigen::Index cap_row(std::size_t t) const { return static_cast<Eigen::Index>(steps + t); }
  Eigen::Index rows() const { return static_cast<Eigen::Index>(2 * steps + (terminal_row ? 1 : 0)); }

  static ModelLayout of(const HorizonProblem& hp) {
    return {hp.horizon(), hp.mode == Mode::joint, hp.terminal == TerminalPolicy::return_to_start};
  }
};

namespace detail {

inline lp::LpProblem build_model(const HorizonProblem& hp) {
  const ModelLayout L = ModelLayout::of(hp);
  const std::size_t T = L.steps;
  const DeviceSpec& dev = hp.device;
  const double cap = dev.energy_per_step(hp.dt_hours);

  lp::LpProblem p;
  p.objective = Eigen::VectorXd::Zero(L.cols());
  p.constraints = Eigen::MatrixXd::Zero(L.rows(), L.cols());
  p.row_lower = Eigen::VectorXd::Zero(L.rows());
  p.row_upper = Eigen::VectorXd::Zero(L.rows());
  p.var_lower = Eigen::VectorXd::Zero(L.cols());
  p.var_upper = Eigen::VectorXd::Zero(L.cols());
  p.col_names.resize(static_cast<std::size_t>(L.cols()));
  p.row_names.resize(static_cast<std::size_t>(L.rows()));

  auto name_col = [&](Eigen::Index j, const char* base, std::size_t t) {
    p.col_names[static_cast<std::size_t>(j)] = std::string(base) + "[" + std::to_string(t) + "]";
  };

  for (std::size_t t = 0; t < T; ++t) {
    const double w = hp.weight(t);
    const double lam = hp.prices.lmp[t];
    p.objective[L.qr(t)] = -w * lam;
    p.objective[L.qd(t)] = w * lam;
    p.var_upper[L.qr(t)] = cap;
    p.var_upper[L.qd(t)] = cap;
    p.var_upper[L.soc_next(t)] = dev.energy_capacity;
    name_col(L.qr(t), "qr", t);
    name_col(L.qd(t), "qd", t);
    name_col(L.soc_next(t), "s", t + 1);

    // s_{t+1} - eta_s s_t - eta_c qr_t + qd_t (+ regulation terms) = eta_s s0 [t == 0]
    const auto row = L.soc_row(t);
    p.constraints(row, L.soc_next(t)) = 1.0;
    if (t > 0) p.constraints(row, L.soc_next(t - 1)) = -dev.eta_s;
    p.constraints(row, L.qr(t)) = -dev.eta_c;
    p.constraints(row, L.qd(t)) = 1.0;
    const double rhs = t == 0 ? dev.eta_s * dev.initial_soc : 0.0;
    p.row_lower[row] = rhs;
    p.row_upper[row] = rhs;
    p.row_names[static_cast<std::size_t>(row)] = "soc[" + std::to_string(t) + "]";

    const auto crow = L.cap_row(t);
    p.constraints(crow, L.qr(t)) = 1.0;
    p.constraints(crow, L.qd(t)) = 1.0;
    p.row_lower[crow] = -lp::kInf;
    p.row_upper[crow] = cap;
    p.row_names[static_cast<std::size_t>(crow)] = "cap[" + std::to_string(t) + "]";

    if (L.joint) {
      const auto& r = *hp.reg;
      const double rcp = (*hp.prices.rcp)[t];
      p.objective[L.qreg(t)] =
          w * (lam * (r.delta_ru[t] - r.delta_rd[t]) + rcp * r.capacity_coefficient(t));
      p.var_upper[L.qreg(t)] = cap;
      p.constraints(row, L.qreg(t)) = r.delta_ru[t] - dev.eta_c * r.delta_rd[t];
      p.constraints(crow, L.qreg(t)) = 1.0;
      name_col(L.qreg(t), "qreg", t);
    }
  }
  if (L.terminal_row) {
    const auto row = L.rows() - 1;
    p.constraints(row, L.soc_next(T - 1)) = 1.0;
    p.row_lower[row] = dev.initial_soc;
    p.row_upper[row] = lp::kInf;
    p.row_names[static_cast<std::size_t>(row)] = "terminal";
  }
  return p;
}

}  // namespace detail

inline lp::LpProblem build_arbitrage(const HorizonProblem& hp) {
  if (hp.mode != Mode::arbitrage) throw ConstructionError("build_arbitrage needs arbitrage mode");
  validate(hp);
  return detail::build_model(hp);
}

inline lp::LpProblem build_joint(const HorizonProblem& hp) {
  if (hp.mode != Mode::joint) throw ConstructionError("build_joint needs joint mode");
  validate(hp);
  return detail::build_model(hp);
}

inline lp::LpProblem build(const HorizonProblem& hp) {
  return hp.mode == Mode::joint ? build_joint(hp) : build_arbitrage(hp);
}

struct Schedule {
  std::vector<double> charge;      // qr, MWh per step
  std::vector<double> discharge;   // qd, MWh per step
  std::vector<double> reg_bid;     // qreg, MWh per step (zero in arbitrage mode)
  std::vector<double> soc;         // length T + 1, soc[0] = s0
  std::vector<bool> simultaneous;  // qr > 0 and qd > 0 in the same step

  std::size_t steps() const { return charge.size(); }
};

inline constexpr double kScheduleTolerance = 1e-9;

/// Every invariant a schedule must satisfy for `hp`, as readable messages.
inline std::vector<std::string> schedule_violations(const HorizonProblem& hp, const Schedule& s,
                                                    double tol = kScheduleTolerance) {
  std::vector<std::string> out;
  const std::size_t T = hp.horizon();
  if (s.charge.size() != T || s.discharge.size() != T || s.reg_bid.size() != T ||
      s.soc.size() != T + 1) {
    out.push_back("schedule length does not match the horizon");
    return out;
  }
  const DeviceSpec& dev = hp.device;
  const double cap = dev.energy_per_step(hp.dt_hours);
  const bool joint = hp.mode == Mode::joint;
  auto at = [](const char* what, std::size_t t) {
    return std::string(what) + " at step " + std::to_string(t);
  };
  if (std::abs(s.soc[0] - dev.initial_soc) > tol) out.push_back("soc[0] differs from s0");
  for (std::size_t t = 0; t < T; ++t) {
    if (s.charge[t] < -tol) out.push_back(at("negative charge", t));
    if (s.discharge[t] < -tol) out.push_back(at("negative discharge", t));
    if (s.reg_bid[t] < -tol) out.push_back(at("negative regulation bid", t));
    if (!joint && std::abs(s.reg_bid[t]) > tol)
      out.push_back(at("regulation bid in arbitrage mode", t));
    if (s.charge[t] + s.discharge[t] + s.reg_bid[t] > cap + tol)
      out.push_back(at("power cap exceeded", t));
    double next = dev.eta_s * s.soc[t] + dev.eta_c * s.charge[t] - s.discharge[t];
    if (joint)
      next += (dev.eta_c * hp.reg->delta_rd[t] - hp.reg->delta_ru[t]) * s.reg_bid[t];
    if (std::abs(s.soc[t + 1] - next) > tol) out.push_back(at("state-of-charge recursion broken", t));
  }
  for (std::size_t t = 0; t <= T; ++t)
    if (s.soc[t] < -tol || s.soc[t] > dev.energy_capacity + tol)
      out.push_back("state of charge outside [0, S] at boundary " + std::to_string(t));
  return out;
}

/// Maps an optimal solution of build(hp) back to per-step series.
inline Schedule extract_schedule(const HorizonProblem& hp, const lp::LpSolution& sol) {
  if (sol.status != lp::LpStatus::optimal)
    throw SolutionContractError(std::string("cannot extract a schedule from a ") +
                                lp::to_string(sol.status) + " solution");
  const ModelLayout L = ModelLayout::of(hp);
  if (sol.primal_values.size() != L.cols())
    throw SolutionContractError("solution does not belong to this horizon problem");
  // Solver round-off around zero is dropped so files read cleanly.
  auto clean = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; };
  const std::size_t T = L.steps;
  Schedule s;
  s.charge.resize(T);
  s.discharge.resize(T);
  s.reg_bid.assign(T, 0.0);
  s.soc.resize(T + 1);
  s.simultaneous.resize(T);
  s.soc[0] = hp.device.initial_soc;
  for (std::size_t t = 0; t < T; ++t) {
    s.charge[t] = clean(sol.primal_values[L.qr(t)]);
    s.discharge[t] = clean(sol.primal_values[L.qd(t)]);
    if (L.joint) s.reg_bid[t] = clean(sol.primal_values[L.qreg(t)]);
    s.soc[t + 1] = clean(sol.primal_values[L.soc_next(t)]);
    s.simultaneous[t] = s.charge[t] > kScheduleTolerance && s.discharge[t] > kScheduleTolerance;
  }
  const auto bad = schedule_violations(hp, s);
  if (!bad.empty()) throw ConsistencyError("extracted schedule violates: " + bad.front());
  return s;
}

struct RevenueReport {
  double r_arb = 0.0;             // undiscounted energy-market revenue
  double r_reg = 0.0;             // undiscounted regulation capacity revenue
  double total_discounted = 0.0;  // objective value
  std::vector<double> per_step_cashflow;  // discounted, sums to total_discounted
};

/// Settles a feasible schedule. Throws SettlementError listing every
/// violation otherwise.
inline RevenueReport settle(const HorizonProblem& hp, const Schedule& s) {
  validate(hp);
  const auto bad = schedule_violations(hp, s);
  if (!bad.empty()) {
    std::string msg = "settlement refused:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw SettlementError(msg);
  }
  const std::size_t T = hp.horizon();
  const bool joint = hp.mode == Mode::joint;
  RevenueReport rep;
  rep.per_step_cashflow.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double lam = hp.prices.lmp[t];
    double net = s.discharge[t] - s.charge[t];
    double reg = 0.0;
    if (joint) {
      const auto& r = *hp.reg;
      net += (r.delta_ru[t] - r.delta_rd[t]) * s.reg_bid[t];
      reg = (*hp.prices.rcp)[t] * s.reg_bid[t] * r.capacity_coefficient(t);
    }
    const double arb = lam * net;
    rep.r_arb += arb;
    rep.r_reg += reg;
    rep.per_step_cashflow[t] = hp.weight(t) * (arb + reg);
    rep.total_discounted += rep.per_step_cashflow[t];
  }
  return rep;
}

struct HorizonResult {
  lp::LpSolution solution;
  std::optional<Schedule> schedule;
  std::optional<RevenueReport> revenue;
  std::optional<lp::CertificateReport> certificate;
};

/// Builds, solves, certifies and settles one horizon. Non-optimal statuses
/// are returned without schedule or revenue.
inline HorizonResult optimize(const HorizonProblem& hp, bool certify = true) {
  HorizonResult out;
  const auto problem = build(hp);
  out.solution = lp::solve(problem);
  if (out.solution.status != lp::LpStatus::optimal) return out;
  if (certify) {
    out.certificate = lp::verify_certificate(problem, out.solution);
    if (!out.certificate->passed)
      throw ConsistencyError("solver returned a solution that fails its optimality certificate");
  }
  out.schedule = extract_schedule(hp, out.solution);
  out.revenue = settle(hp, *out.schedule);
  const double scale = 1.0 + std::abs(out.solution.objective_value);
  if (std::abs(out.revenue->total_discounted - out.solution.objective_value) > 1e-8 * scale)
    throw ConsistencyError("settled revenue disagrees with the model objective");
  return out;
}

}  // namespace essrev
