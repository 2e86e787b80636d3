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
 *  \brief Multi-day batch runs over devices, locations and modes.
 *
 *  Every (day, device, location, mode) tuple becomes one daily horizon.
 *  Under the carry-over policy a stream's next day starts from the
 *  previous day's terminal state of charge, so each (device, location,
 *  mode) stream is solved in date order; streams run in parallel. Under
 *  the independent policy every day starts from the device default and all
 *  tuples run in parallel. Records land in fixed slots, so the result does
 *  not depend on scheduling.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "essrev/device.hpp"
#include "essrev/errors.hpp"
#include "essrev/market_model.hpp"
#include "essrev/prices.hpp"
#include "essrev/text.hpp"

namespace essrev {

enum class SocPolicy { carry_over, independent };

inline const char* to_string(SocPolicy p) {
  return p == SocPolicy::carry_over ? "carry-over" : "independent";
}
inline std::optional<SocPolicy> parse_soc_policy(const std::string& s) {
  if (s == "carry-over") return SocPolicy::carry_over;
  if (s == "independent") return SocPolicy::independent;
  return std::nullopt;
}

struct RegulationDefaults {
  double delta_ru = kDefaultDeltaUp;
  double delta_rd = kDefaultDeltaDown;
  double gamma = kDefaultPerformance;
  double penalty_factor = kPenaltyFactor;
};

struct RegulationSample {
  double delta_ru;
  double delta_rd;
  double gamma;
};

/// Per-step regulation values keyed by timestamp; steps without an entry
/// use the defaults.
using RegulationOverrides = std::map<std::int64_t, RegulationSample>;

struct CampaignConfig {
  std::int64_t first_day = 0;  // days since epoch, inclusive
  std::int64_t last_day = -1;
  std::vector<DeviceSpec> devices;
  std::vector<std::string> locations;
  std::vector<Mode> modes;
  SocPolicy soc_policy = SocPolicy::carry_over;
  int horizon_hours = 24;
  RegulationDefaults regulation;
  RegulationOverrides regulation_overrides;
  double discount_rate = 0.0;
  TerminalPolicy terminal = TerminalPolicy::free;
  unsigned workers = 0;  // 0: hardware concurrency

  std::int64_t num_days() const { return last_day - first_day + 1; }
};

struct RunRecord {
  std::int64_t day = 0;
  std::string device;
  std::string location;
  Mode mode = Mode::arbitrage;
  std::string status;  // optimal | infeasible | unbounded | error
  double soc_start = 0.0;
  double soc_end = 0.0;
  double r_arb = 0.0;
  double r_reg = 0.0;
  double total = 0.0;
  std::int64_t iterations = 0;
  int simultaneous_steps = 0;
  std::string message;

  bool solved() const { return status == "optimal"; }
  bool operator==(const RunRecord&) const = default;
};

struct CampaignResult {
  std::vector<RunRecord> records;    // date, then device, location, mode in config order
  std::vector<std::string> failures;
};

inline void validate(const CampaignConfig& c) {
  auto fail = [](const std::string& what) { throw CampaignConfigError(what); };
  if (c.num_days() <= 0) fail("date range is empty");
  if (c.devices.empty()) fail("at least one device is required");
  if (c.locations.empty()) fail("at least one location is required");
  if (c.modes.empty()) fail("at least one mode is required");
  if (c.horizon_hours <= 0 || 24 % c.horizon_hours != 0)
    fail("horizon_hours must divide 24");
  for (const auto& d : c.devices) {
    const auto rep = validate(d);
    if (!rep.valid()) fail("device '" + d.name + "': " + rep.errors.front());
  }
  const auto& r = c.regulation;
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(r.delta_ru) || !unit(r.delta_rd) || !unit(r.gamma) || !(r.penalty_factor >= 0.0))
    fail("regulation defaults out of range");
  for (const auto& [t, s] : c.regulation_overrides)
    if (!unit(s.delta_ru) || !unit(s.delta_rd) || !unit(s.gamma))
      fail("regulation override at " + text::format_timestamp(t) + " out of range");
  if (!(c.discount_rate >= 0.0)) fail("discount rate must be non-negative");
}

namespace detail {

inline std::string day_ranges(const std::vector<std::int64_t>& days) {
  std::string out;
  for (std::size_t i = 0; i < days.size();) {
    std::size_t j = i;
    while (j + 1 < days.size() && days[j + 1] == days[j] + 1) ++j;
    if (!out.empty()) out += ", ";
    out += text::format_date(days[i]);
    if (j > i) out += ".." + text::format_date(days[j]);
    i = j + 1;
  }
  return out;
}

}  // namespace detail

/// Throws CoverageError listing every location/day without complete prices.
inline void check_coverage(const CampaignConfig& c, const PriceStore& prices) {
  std::string problems;
  for (const auto& loc : c.locations) {
    auto it = prices.find(loc);
    if (it == prices.end()) {
      problems += "\n  " + loc + ": no price series";
      continue;
    }
    const PriceSeries& s = it->second;
    if (!s.is_regular()) {
      problems += "\n  " + loc + ": series is irregular; resample it first";
      continue;
    }
    if (86400 % s.step_seconds != 0 || (c.horizon_hours * 3600) % s.step_seconds != 0) {
      problems += "\n  " + loc + ": step does not divide the horizon";
      continue;
    }
    const bool joint = std::find(c.modes.begin(), c.modes.end(), Mode::joint) != c.modes.end();
    if (joint && !s.rcp) problems += "\n  " + loc + ": regulation capacity price required";
    const auto per_day = static_cast<std::size_t>(86400 / s.step_seconds);
    std::vector<std::int64_t> missing;
    for (std::int64_t d = c.first_day; d <= c.last_day; ++d) {
      const auto idx = s.index_of(d * text::kSecondsPerDay);
      if (!idx || *idx + per_day > s.size()) missing.push_back(d);
    }
    if (!missing.empty()) problems += "\n  " + loc + ": missing " + detail::day_ranges(missing);
  }
  if (!problems.empty()) throw CoverageError("price coverage gaps:" + problems);
}

namespace detail {

struct Stream {
  std::size_t device;
  std::size_t location;
  std::size_t mode;
};

inline RegulationParams regulation_for(const CampaignConfig& c, const PriceSeries& day) {
  RegulationParams r = RegulationParams::uniform(day.size(), c.regulation.delta_ru,
                                                 c.regulation.delta_rd, c.regulation.gamma,
                                                 c.regulation.penalty_factor);
  if (c.regulation_overrides.empty()) return r;
  for (std::size_t t = 0; t < day.size(); ++t) {
    auto it = c.regulation_overrides.find(day.timestamps[t]);
    if (it == c.regulation_overrides.end()) continue;
    r.delta_ru[t] = it->second.delta_ru;
    r.delta_rd[t] = it->second.delta_rd;
    r.gamma[t] = it->second.gamma;
  }
  return r;
}

// Solves one day as consecutive horizons of c.horizon_hours.
inline RunRecord solve_day(const CampaignConfig& c, const DeviceSpec& device,
                           const PriceSeries& series, Mode mode, std::int64_t day,
                           double soc_start) {
  RunRecord rec;
  rec.day = day;
  rec.device = device.name;
  rec.location = series.location;
  rec.mode = mode;
  rec.soc_start = soc_start;
  rec.soc_end = soc_start;
  const auto first = *series.index_of(day * text::kSecondsPerDay);
  const auto per_horizon = static_cast<std::size_t>(c.horizon_hours * 3600 / series.step_seconds);
  const std::size_t blocks = static_cast<std::size_t>(24 / c.horizon_hours);
  double soc = soc_start;
  try {
    for (std::size_t b = 0; b < blocks; ++b) {
      HorizonProblem hp;
      hp.device = device;
      hp.device.initial_soc = soc;
      hp.prices = slice(series, first + b * per_horizon, per_horizon);
      hp.dt_hours = series.dt_hours();
      hp.discount_rate = c.discount_rate;
      hp.mode = mode;
      hp.terminal = c.terminal;
      if (mode == Mode::joint) hp.reg = regulation_for(c, hp.prices);
      const auto res = optimize(hp);
      rec.iterations += res.solution.iterations;
      if (res.solution.status != lp::LpStatus::optimal) {
        rec.status = lp::to_string(res.solution.status);
        rec.message = "block " + std::to_string(b) + " " + rec.status;
        return rec;
      }
      rec.r_arb += res.revenue->r_arb;
      rec.r_reg += res.revenue->r_reg;
      rec.total += res.revenue->total_discounted;
      for (bool f : res.schedule->simultaneous) rec.simultaneous_steps += f ? 1 : 0;
      soc = std::clamp(res.schedule->soc.back(), 0.0, device.energy_capacity);
    }
  } catch (const Error& e) {
    rec.status = "error";
    rec.message = std::string(e.module()) + ": " + e.what();
    return rec;
  }
  rec.status = "optimal";
  rec.soc_end = soc;
  return rec;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Solves every configured tuple. Coverage is checked up front; failures
/// of individual days are recorded and do not stop the run.
inline CampaignResult run(const CampaignConfig& c, const PriceStore& prices) {
  validate(c);
  check_coverage(c, prices);

  std::vector<detail::Stream> streams;
  for (std::size_t d = 0; d < c.devices.size(); ++d)
    for (std::size_t l = 0; l < c.locations.size(); ++l)
      for (std::size_t m = 0; m < c.modes.size(); ++m) streams.push_back({d, l, m});
  const auto days = static_cast<std::size_t>(c.num_days());
  const std::size_t per_day = streams.size();

  CampaignResult out;
  out.records.resize(days * per_day);
  auto slot = [&](std::size_t stream, std::size_t day) -> RunRecord& {
    return out.records[day * per_day + stream];
  };
  auto run_one = [&](std::size_t stream, std::size_t day, double soc) -> const RunRecord& {
    const auto& s = streams[stream];
    const auto& series = prices.at(c.locations[s.location]);
    RunRecord& rec = slot(stream, day);
    rec = detail::solve_day(c, c.devices[s.device], series, c.modes[s.mode],
                            c.first_day + static_cast<std::int64_t>(day), soc);
    rec.location = c.locations[s.location];
    return rec;
  };

  if (c.soc_policy == SocPolicy::carry_over) {
    detail::parallel_for(streams.size(), c.workers, [&](std::size_t stream) {
      double soc = c.devices[streams[stream].device].initial_soc;
      for (std::size_t d = 0; d < days; ++d) {
        const auto& rec = run_one(stream, d, soc);
        if (rec.solved()) soc = rec.soc_end;
      }
    });
  } else {
    detail::parallel_for(streams.size() * days, c.workers, [&](std::size_t task) {
      const std::size_t stream = task % streams.size();
      run_one(stream, task / streams.size(), c.devices[streams[stream].device].initial_soc);
    });
  }
  for (const auto& r : out.records)
    if (!r.solved())
      out.failures.push_back(text::format_date(r.day) + " " + r.device + " " + r.location + " " +
                             to_string(r.mode) + ": " + r.status +
                             (r.message.empty() ? "" : " (" + r.message + ")"));
  return out;
}

enum class Grouping { monthly, annual };
enum class Statistic { mean, sum };

struct AggregateRow {
  std::string device;
  std::string location;
  Mode mode = Mode::arbitrage;
  std::string period;  // "YYYY" or "YYYY-MM"
  int days = 0;        // solved days in the group
  double r_arb = 0.0;
  double r_reg = 0.0;
  double total = 0.0;
};

namespace detail {
inline std::string period_of(std::int64_t day, Grouping g) {
  const std::string date = text::format_date(day);
  return g == Grouping::annual ? date.substr(0, 4) : date.substr(0, 7);
}
using GroupKey = std::tuple<std::string, std::string, std::string, std::string>;
}  // namespace detail

/// Per (device, location, mode, period) statistic over solved days, sorted
/// by that key. Groups without solved days are omitted.
inline std::vector<AggregateRow> aggregate(const CampaignResult& result, Grouping grouping,
                                           Statistic statistic) {
  if (result.records.empty()) throw CampaignConfigError("cannot aggregate an empty result");
  std::map<detail::GroupKey, AggregateRow> groups;
  for (const auto& r : result.records) {
    if (!r.solved()) continue;
    const std::string period = detail::period_of(r.day, grouping);
    auto [it, fresh] =
        groups.try_emplace({r.device, r.location, to_string(r.mode), period});
    auto& g = it->second;
    if (fresh) {
      g.device = r.device;
      g.location = r.location;
      g.mode = r.mode;
      g.period = period;
    }
    ++g.days;
    g.r_arb += r.r_arb;
    g.r_reg += r.r_reg;
    g.total += r.total;
  }
  std::vector<AggregateRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, g] : groups) {
    if (statistic == Statistic::mean) {
      g.r_arb /= g.days;
      g.r_reg /= g.days;
      g.total /= g.days;
    }
    rows.push_back(std::move(g));
  }
  return rows;
}

struct YoyRow {
  std::string device;
  std::string location;
  Mode mode = Mode::arbitrage;
  std::optional<double> revenue_a;  // mean daily total in year_a
  std::optional<double> revenue_b;
  std::optional<double> percent;    // undefined when revenue_a is 0 or a year is missing
};

/// Percentage change of mean daily revenue from year_a to year_b per
/// (device, location, mode).
inline std::vector<YoyRow> yoy_delta(const CampaignResult& result, int year_a, int year_b) {
  const auto annual = aggregate(result, Grouping::annual, Statistic::mean);
  const std::string ya = std::to_string(year_a), yb = std::to_string(year_b);
  bool has_a = false, has_b = false;
  std::map<std::tuple<std::string, std::string, std::string>, YoyRow> rows;
  for (const auto& g : annual) {
    if (g.period != ya && g.period != yb) continue;
    auto& row = rows[{g.device, g.location, to_string(g.mode)}];
    row.device = g.device;
    row.location = g.location;
    row.mode = g.mode;
    if (g.period == ya) row.revenue_a = g.total, has_a = true;
    if (g.period == yb) row.revenue_b = g.total, has_b = true;
  }
  if (!has_a) throw YearLookupError("year " + ya + " has no solved days");
  if (!has_b) throw YearLookupError("year " + yb + " has no solved days");
  std::vector<YoyRow> out;
  for (auto& [key, row] : rows) {
    if (row.revenue_a && row.revenue_b && *row.revenue_a != 0.0)
      row.percent = 100.0 * (*row.revenue_b - *row.revenue_a) / *row.revenue_a;
    out.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV forms

inline void write_records(std::ostream& os, const CampaignResult& r) {
  os << "date,device,location,mode,status,soc_start,soc_end,r_arb,r_reg,total,iterations,"
        "simultaneous_steps,message\n";
  using text::format_number;
  for (const auto& x : r.records) {
    os << text::format_date(x.day) << ',' << text::quote_field(x.device) << ','
       << text::quote_field(x.location) << ',' << to_string(x.mode) << ',' << x.status << ','
       << format_number(x.soc_start) << ',' << format_number(x.soc_end) << ','
       << format_number(x.r_arb) << ',' << format_number(x.r_reg) << ','
       << format_number(x.total) << ',' << x.iterations << ',' << x.simultaneous_steps << ','
       << text::quote_field(x.message) << '\n';
  }
}

inline CampaignResult read_records(std::istream& in, const std::string& source = "<records>") {
  CampaignResult out;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (header) {
      if (line.rfind("date,device,location,mode,status", 0) != 0)
        throw SchemaError(source + ": not a campaign records file");
      header = false;
      continue;
    }
    const auto f = text::split_fields(line);
    auto bad = [&](const std::string& what) {
      return ParseError(source + ":" + std::to_string(line_no) + ": " + what);
    };
    if (f.size() != 13) throw bad("expected 13 fields");
    RunRecord r;
    const auto day = text::parse_date(f[0]);
    const auto mode = parse_mode(f[3]);
    if (!day) throw bad("bad date \"" + f[0] + "\"");
    if (!mode) throw bad("bad mode \"" + f[3] + "\"");
    auto num = [&](const std::string& s) {
      const auto v = text::parse_number(s);
      if (!v) throw bad("bad number \"" + s + "\"");
      return *v;
    };
    r.day = *day;
    r.device = f[1];
    r.location = f[2];
    r.mode = *mode;
    r.status = f[4];
    r.soc_start = num(f[5]);
    r.soc_end = num(f[6]);
    r.r_arb = num(f[7]);
    r.r_reg = num(f[8]);
    r.total = num(f[9]);
    r.iterations = static_cast<std::int64_t>(num(f[10]));
    r.simultaneous_steps = static_cast<int>(num(f[11]));
    r.message = f[12];
    if (!r.solved()) out.failures.push_back(text::format_date(r.day) + " " + r.device + ": " + r.status);
    out.records.push_back(std::move(r));
  }
  if (header) throw SchemaError(source + ": empty records file");
  return out;
}

inline void write_aggregate(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << "device,location,mode,period,days,r_arb,r_reg,total\n";
  for (const auto& g : rows)
    os << text::quote_field(g.device) << ',' << text::quote_field(g.location) << ','
       << to_string(g.mode) << ',' << g.period << ',' << g.days << ','
       << text::format_number(g.r_arb) << ',' << text::format_number(g.r_reg) << ','
       << text::format_number(g.total) << '\n';
}

inline void write_yoy(std::ostream& os, const std::vector<YoyRow>& rows, int year_a, int year_b) {
  auto opt = [](const std::optional<double>& v) {
    return v ? text::format_number(*v) : std::string("undefined");
  };
  os << "device,location,mode,year_a,year_b,revenue_a,revenue_b,percent_change\n";
  for (const auto& r : rows)
    os << text::quote_field(r.device) << ',' << text::quote_field(r.location) << ','
       << to_string(r.mode) << ',' << year_a << ',' << year_b << ',' << opt(r.revenue_a) << ','
       << opt(r.revenue_b) << ',' << opt(r.percent) << '\n';
}

}  // namespace essrev
