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

#include <gtest/gtest.h>

#include <random>

#include "essrev/market_model.hpp"
#include "model_oracles.hpp"

namespace essrev {
namespace {

DeviceSpec unit_device(double eta_c = 1.0, double eta_s = 1.0, double s0 = 0.0) {
  return DeviceSpec{"unit", eta_s, eta_c, 1.0, 1.0, s0};
}

PriceSeries prices(std::vector<double> lmp, std::optional<std::vector<double>> rcp = {}) {
  PriceSeries s;
  s.location = "test";
  for (std::size_t t = 0; t < lmp.size(); ++t) s.timestamps.push_back(static_cast<std::int64_t>(t) * 3600);
  s.lmp = std::move(lmp);
  s.rcp = std::move(rcp);
  return s;
}

HorizonProblem arbitrage(std::vector<double> lmp, DeviceSpec dev) {
  HorizonProblem hp;
  hp.device = std::move(dev);
  hp.prices = prices(std::move(lmp));
  hp.mode = Mode::arbitrage;
  return hp;
}

HorizonProblem joint_single(double gamma) {
  HorizonProblem hp;
  hp.device = unit_device(1.0, 1.0, 0.5);
  hp.prices = prices({0.0}, std::vector<double>{10.0});
  hp.reg = RegulationParams::uniform(1, 0.2, 0.2, gamma);
  hp.mode = Mode::joint;
  return hp;
}

// Expected values below were first computed by the grid oracle (see the
// OracleAgrees tests) and by hand from the closed forms.
TEST(Arbitrage, SpreadCapture) {
  const auto hp = arbitrage({10, 20}, unit_device());
  const auto res = optimize(hp);
  ASSERT_EQ(res.solution.status, lp::LpStatus::optimal);
  EXPECT_NEAR(res.solution.objective_value, 10.0, 1e-8);
  EXPECT_NEAR(res.schedule->charge[0], 1.0, 1e-9);
  EXPECT_NEAR(res.schedule->charge[1], 0.0, 1e-9);
  EXPECT_NEAR(res.schedule->discharge[0], 0.0, 1e-9);
  EXPECT_NEAR(res.schedule->discharge[1], 1.0, 1e-9);
  const std::vector<double> soc{0, 1, 0};
  for (int t = 0; t < 3; ++t) EXPECT_NEAR(res.schedule->soc[t], soc[t], 1e-9);
  EXPECT_NEAR(res.revenue->r_arb, 10.0, 1e-8);
  EXPECT_EQ(res.revenue->r_reg, 0.0);
}

TEST(Arbitrage, FlatPricesIdle) {
  const auto res = optimize(arbitrage({15, 15}, unit_device(0.9)));
  EXPECT_NEAR(res.solution.objective_value, 0.0, 1e-8);
}

TEST(Arbitrage, LossyCycle) {
  const auto res = optimize(arbitrage({10, 20}, unit_device(0.9)));
  EXPECT_NEAR(res.solution.objective_value, 8.0, 1e-8);
}

TEST(Arbitrage, OracleAgrees) {
  for (double eta : {1.0, 0.9}) {
    const auto hp = arbitrage({10, 20}, unit_device(eta));
    const auto oracle = testing::grid_search(hp);
    EXPECT_NEAR(oracle.objective, eta == 1.0 ? 10.0 : 8.0, 1e-12);
    EXPECT_NEAR(optimize(hp).solution.objective_value, oracle.objective, 1e-8);
  }
  EXPECT_NEAR(testing::grid_search(arbitrage({15, 15}, unit_device(0.9))).objective, 0.0, 1e-12);
}

TEST(Joint, FullPerformance) {
  const auto res = optimize(joint_single(1.0));
  EXPECT_NEAR(res.solution.objective_value, 10.0, 1e-8);
  EXPECT_NEAR(res.schedule->reg_bid[0], 1.0, 1e-9);
}

TEST(Joint, HalfPerformancePenalized) {
  const auto hp = joint_single(0.5);
  const auto res = optimize(hp);
  EXPECT_NEAR(res.solution.objective_value, 4.5, 1e-8);
  EXPECT_NEAR(res.revenue->r_arb, 0.0, 1e-12);
  EXPECT_NEAR(res.revenue->r_reg, 4.5, 1e-8);
  EXPECT_NEAR(res.revenue->total_discounted, 4.5, 1e-8);
}

TEST(Joint, ZeroPerformanceBidsNothing) {
  const auto res = optimize(joint_single(0.0));
  EXPECT_NEAR(res.solution.objective_value, 0.0, 1e-8);
  EXPECT_NEAR(res.schedule->reg_bid[0], 0.0, 1e-9);
}

TEST(Joint, OracleAgrees) {
  for (auto [gamma, expected] : {std::pair{1.0, 10.0}, {0.5, 4.5}, {0.0, 0.0}}) {
    const auto hp = joint_single(gamma);
    const auto oracle = testing::grid_search(hp);
    EXPECT_NEAR(oracle.objective, expected, 1e-12);
    EXPECT_NEAR(optimize(hp).solution.objective_value, oracle.objective, 1e-8);
  }
}

TEST(Joint, MissingCapacityPriceIsConstructionError) {
  auto hp = joint_single(1.0);
  hp.prices.rcp.reset();
  EXPECT_THROW(build_joint(hp), ConstructionError);
  hp = joint_single(1.0);
  hp.reg.reset();
  EXPECT_THROW(build_joint(hp), ConstructionError);
}

TEST(Build, ModeMismatchAndBadHorizon) {
  EXPECT_THROW(build_joint(arbitrage({1, 2}, unit_device())), ConstructionError);
  EXPECT_THROW(build_arbitrage(joint_single(1.0)), ConstructionError);
  EXPECT_THROW(build(arbitrage({}, unit_device())), ConstructionError);
  auto bad = unit_device();
  bad.eta_c = 1.2;
  EXPECT_THROW(build(arbitrage({1, 2}, bad)), ConstructionError);
}

TEST(Build, ReturnToStartAddsTerminalRow) {
  auto hp = arbitrage({20, 10}, unit_device(1.0, 1.0, 0.5));
  EXPECT_EQ(build(hp).num_rows(), 4);
  hp.terminal = TerminalPolicy::return_to_start;
  const auto p = build(hp);
  EXPECT_EQ(p.num_rows(), 5);
  const auto res = optimize(hp);
  EXPECT_GE(res.schedule->soc.back(), 0.5 - 1e-9);
  EXPECT_NEAR(res.solution.objective_value, testing::grid_search(hp).objective, 1e-8);
}

// Hand-built optimal solution with every flow at zero; the SoC columns
// follow the self-discharge recursion.
lp::LpSolution idle_solution(const HorizonProblem& hp) {
  const auto L = ModelLayout::of(hp);
  lp::LpSolution sol;
  sol.status = lp::LpStatus::optimal;
  sol.primal_values = Eigen::VectorXd::Zero(L.cols());
  double s = hp.device.initial_soc;
  for (std::size_t t = 0; t < L.steps; ++t) {
    s *= hp.device.eta_s;
    sol.primal_values[L.soc_next(t)] = s;
  }
  return sol;
}

TEST(Extract, IdleKeepsStateOfCharge) {
  const auto hp = arbitrage({5, 5, 5}, unit_device(0.9, 1.0, 0.3));
  const auto s = extract_schedule(hp, idle_solution(hp)).soc;
  ASSERT_EQ(s.size(), 4u);
  for (double v : s) EXPECT_EQ(v, 0.3);
}

TEST(Extract, SelfDischargeDecaysGeometrically) {
  const auto hp = arbitrage({0, 0}, unit_device(1.0, 0.9, 1.0));
  const auto s = extract_schedule(hp, idle_solution(hp)).soc;
  EXPECT_NEAR(s[0], 1.0, 1e-15);
  EXPECT_NEAR(s[1], 0.9, 1e-15);
  EXPECT_NEAR(s[2], 0.81, 1e-15);
}

TEST(Extract, ArbitrageSpreadStateOfCharge) {
  const auto hp = arbitrage({10, 20}, unit_device());
  const auto s = extract_schedule(hp, lp::solve(build(hp))).soc;
  EXPECT_NEAR(s[0], 0.0, 1e-12);
  EXPECT_NEAR(s[1], 1.0, 1e-12);
  EXPECT_NEAR(s[2], 0.0, 1e-12);
}

TEST(Extract, BrokenRecursionIsConsistencyError) {
  const auto hp = arbitrage({0, 0}, unit_device(1.0, 0.9, 1.0));
  auto sol = idle_solution(hp);
  sol.primal_values[ModelLayout::of(hp).soc_next(1)] += 0.1;
  EXPECT_THROW(extract_schedule(hp, sol), ConsistencyError);
}

TEST(Extract, RejectsNonOptimal) {
  const auto hp = arbitrage({1, 2}, unit_device());
  lp::LpSolution sol;
  sol.status = lp::LpStatus::infeasible;
  EXPECT_THROW(extract_schedule(hp, sol), SolutionContractError);
}

TEST(Extract, FlagsSimultaneousChargeAndDischarge) {
  // Negative price on a full store: cycling energy through the losses is paid.
  auto hp = arbitrage({-10}, unit_device(0.5, 1.0, 1.0));
  const auto res = optimize(hp);
  EXPECT_GT(res.solution.objective_value, 0.0);
  EXPECT_TRUE(res.schedule->simultaneous[0]);
}

TEST(Settle, ZeroScheduleEarnsNothing) {
  const auto hp = joint_single(0.5);
  Schedule s{{0.0}, {0.0}, {0.0}, {0.5, 0.5}, {false}};
  const auto rep = settle(hp, s);
  EXPECT_EQ(rep.r_arb, 0.0);
  EXPECT_EQ(rep.r_reg, 0.0);
  EXPECT_EQ(rep.total_discounted, 0.0);
}

TEST(Settle, RefusesInfeasibleSchedule) {
  const auto hp = arbitrage({10, 20}, unit_device());
  Schedule s{{2.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 2.0, 2.0}, {false, false}};
  try {
    settle(hp, s);
    FAIL() << "expected SettlementError";
  } catch (const SettlementError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("power cap exceeded at step 0"), std::string::npos);
    EXPECT_NE(msg.find("outside [0, S]"), std::string::npos);
  }
}

TEST(Settle, DiscountingMatchesObjective) {
  HorizonProblem hp = arbitrage({10, 30, 40}, unit_device(0.9));
  hp.discount_rate = 0.05;
  const auto res = optimize(hp);
  double sum = 0;
  for (double c : res.revenue->per_step_cashflow) sum += c;
  EXPECT_NEAR(sum, res.solution.objective_value, 1e-9);
  EXPECT_NEAR(res.revenue->total_discounted, res.solution.objective_value, 1e-9);
  EXPECT_GE(res.solution.objective_value, testing::grid_search(hp).objective - 1e-9);
}

// Randomized daily instances shared by the property tests.
HorizonProblem random_day(std::mt19937_64& rng, Mode mode, std::size_t T = 24) {
  std::uniform_real_distribution<double> price(-20.0, 120.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto names = preset_names();
  HorizonProblem hp;
  hp.device = preset(names[rng() % names.size()]);
  hp.device.initial_soc = unit(rng) * hp.device.energy_capacity;
  if (unit(rng) < 0.3) hp.device.eta_s = 0.95 + 0.05 * unit(rng);
  std::vector<double> lmp(T), rcp(T);
  for (std::size_t t = 0; t < T; ++t) {
    lmp[t] = price(rng);
    rcp[t] = 30.0 * unit(rng);
  }
  hp.prices = prices(lmp, rcp);
  RegulationParams reg;
  for (std::size_t t = 0; t < T; ++t) {
    reg.delta_ru.push_back(0.3 * unit(rng));
    reg.delta_rd.push_back(0.3 * unit(rng));
    reg.gamma.push_back(0.7 + 0.3 * unit(rng));
  }
  hp.reg = reg;
  hp.mode = mode;
  return hp;
}

TEST(Properties, FeasibleBoundedAndConsistent) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    for (Mode mode : {Mode::arbitrage, Mode::joint}) {
      const auto hp = random_day(rng, mode);
      const auto res = optimize(hp);
      ASSERT_EQ(res.solution.status, lp::LpStatus::optimal);
      EXPECT_TRUE(schedule_violations(hp, *res.schedule).empty());
    }
  }
}

TEST(Properties, JointDominatesArbitrage) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    auto hp = random_day(rng, Mode::joint);
    const double joint = optimize(hp).solution.objective_value;
    hp.mode = Mode::arbitrage;
    const double arb = optimize(hp).solution.objective_value;
    EXPECT_GE(joint, arb - 1e-9 * (1 + std::abs(arb)));
  }
}

TEST(Properties, PriceScalingAndZeroPrices) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 30; ++i) {
    auto hp = random_day(rng, i % 2 ? Mode::joint : Mode::arbitrage);
    const double base = optimize(hp).solution.objective_value;
    auto scaled = hp;
    for (auto& v : scaled.prices.lmp) v *= 0.63;
    for (auto& v : *scaled.prices.rcp) v *= 0.63;
    EXPECT_NEAR(optimize(scaled).solution.objective_value, 0.63 * base, 1e-9 * (1 + std::abs(base)));
    auto zero = hp;
    for (auto& v : zero.prices.lmp) v = 0.0;
    for (auto& v : *zero.prices.rcp) v = 0.0;
    EXPECT_NEAR(optimize(zero).solution.objective_value, 0.0, 1e-12);
  }
}

TEST(Properties, CapacityMonotone) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 30; ++i) {
    auto hp = random_day(rng, i % 2 ? Mode::joint : Mode::arbitrage);
    const double base = optimize(hp).solution.objective_value;
    hp.device.energy_capacity *= 1.5;
    hp.device.power_rating *= 1.2;
    EXPECT_GE(optimize(hp).solution.objective_value, base - 1e-9 * (1 + std::abs(base)));
  }
}

TEST(Properties, GridOracleBracketsSmallInstances) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> price(-10.0, 50.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const std::size_t T = 1 + rng() % 3;
    std::vector<double> lmp(T);
    for (auto& v : lmp) v = price(rng);
    auto hp = arbitrage(lmp, unit_device(0.8 + 0.2 * unit(rng), 1.0, 0.5 * unit(rng)));
    const double lp_obj = optimize(hp).solution.objective_value;
    const double grid = testing::grid_search(hp).objective;
    EXPECT_GE(lp_obj, grid - 1e-9);
  }
}

}  // namespace
}  // namespace essrev
