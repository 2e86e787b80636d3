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
 *  \brief Storage technology parameters and their validation.
 *
 *  Presets follow the published parameter table for five technologies
 *  (self-discharge efficiency 100% throughout):
 *
 *  | preset          | eta_c | S [MWh] | Q [MW] |
 *  |-----------------|-------|---------|--------|
 *  | li-ion          | 0.90  | 24      | 36     |
 *  | adv-lead-acid   | 0.95  | 7.5     | 10     |
 *  | vanadium-redox  | 0.85  | 60      | 15     |
 *  | lfp             | 0.93  | 7.8     | 19.8   |
 *  | flywheel        | 0.85  | 5       | 20     |
 */

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "essrev/errors.hpp"

namespace essrev {

struct DeviceSpec {
  std::string name;
  double eta_s = 1.0;           // self-discharge efficiency per step
  double eta_c = 1.0;           // round-trip efficiency, applied on charge
  double energy_capacity = 0.0; // MWh
  double power_rating = 0.0;    // MW
  double initial_soc = 0.0;     // MWh

  /// Energy that can cross the terminals in one step of `dt_hours`.
  double energy_per_step(double dt_hours) const { return power_rating * dt_hours; }
  /// Hours of full-power discharge from a full store.
  double duration_hours() const {
    return power_rating > 0.0 ? energy_capacity / power_rating : INFINITY;
  }

  bool operator==(const DeviceSpec&) const = default;
};

inline constexpr double kMarketDurationHours = 4.0;

namespace detail {
struct PresetRow {
  std::string_view label;
  double eta_c;
  double energy_capacity;
  double power_rating;
};
inline constexpr std::array<PresetRow, 5> kPresets{{
    {"li-ion", 0.90, 24.0, 36.0},
    {"adv-lead-acid", 0.95, 7.5, 10.0},
    {"vanadium-redox", 0.85, 60.0, 15.0},
    {"lfp", 0.93, 7.8, 19.8},
    {"flywheel", 0.85, 5.0, 20.0},
}};

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}
}  // namespace detail

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& row : detail::kPresets) out.emplace_back(row.label);
  return out;
}

/// Table row for `technology` (case-insensitive). Throws LookupError
/// listing the valid labels otherwise.
inline DeviceSpec preset(std::string_view technology) {
  const std::string key = detail::lower(technology);
  for (const auto& row : detail::kPresets) {
    if (row.label == key)
      return DeviceSpec{std::string(row.label), 1.0, row.eta_c, row.energy_capacity,
                        row.power_rating, 0.0};
  }
  std::string valid;
  for (const auto& row : detail::kPresets) {
    if (!valid.empty()) valid += ", ";
    valid += row.label;
  }
  throw LookupError("unknown technology '" + std::string(technology) + "' (valid: " + valid +
                    ")");
}

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool valid() const { return errors.empty(); }
};

inline ValidationReport validate(const DeviceSpec& spec) {
  ValidationReport rep;
  auto finite_nonneg = [&](double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) {
      rep.errors.push_back(std::string(what) + " must be finite and non-negative");
      return false;
    }
    return true;
  };
  if (!(spec.eta_s >= 0.0 && spec.eta_s <= 1.0))
    rep.errors.push_back("self-discharge efficiency out of range [0, 1]");
  if (!(spec.eta_c > 0.0 && spec.eta_c <= 1.0))
    rep.errors.push_back("round-trip efficiency out of range (0, 1]");
  const bool cap_ok = finite_nonneg(spec.energy_capacity, "energy capacity");
  finite_nonneg(spec.power_rating, "power rating");
  if (!std::isfinite(spec.initial_soc) || spec.initial_soc < 0.0) {
    rep.errors.push_back("initial state of charge must be finite and non-negative");
  } else if (cap_ok && spec.initial_soc > spec.energy_capacity) {
    rep.errors.push_back("initial state exceeds capacity");
  }
  if (rep.errors.empty() && spec.duration_hours() < kMarketDurationHours) {
    rep.warnings.push_back("market eligibility: discharge duration " +
                           std::to_string(spec.duration_hours()) + " h is below the " +
                           std::to_string(static_cast<int>(kMarketDurationHours)) +
                           " h energy-market requirement");
  }
  return rep;
}

}  // namespace essrev
