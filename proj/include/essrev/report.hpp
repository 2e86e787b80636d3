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

// Output formats: per-step schedule CSV, revenue JSON summary and static
// SVG bar charts built from campaign tables.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "essrev/campaign.hpp"
#include "essrev/errors.hpp"
#include "essrev/market_model.hpp"
#include "essrev/text.hpp"

namespace essrev {

inline void write_schedule(std::ostream& os, const HorizonProblem& hp, const Schedule& s,
                           const RevenueReport& rev) {
  using text::format_number;
  os << "time,q_r,q_d,q_reg,soc_start,soc_end,cashflow,simultaneous\n";
  for (std::size_t t = 0; t < s.steps(); ++t) {
    os << text::format_timestamp(hp.prices.timestamps[t]) << ',' << format_number(s.charge[t])
       << ',' << format_number(s.discharge[t]) << ',' << format_number(s.reg_bid[t]) << ','
       << format_number(s.soc[t]) << ',' << format_number(s.soc[t + 1]) << ','
       << format_number(rev.per_step_cashflow[t]) << ',' << (s.simultaneous[t] ? 1 : 0) << '\n';
  }
}

struct ScheduleTable {
  std::vector<std::int64_t> timestamps;
  Schedule schedule;
  std::vector<double> cashflow;
};

inline ScheduleTable read_schedule(std::istream& in, const std::string& source = "<schedule>") {
  ScheduleTable out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "time,q_r,q_d,q_reg,soc_start,soc_end,cashflow,simultaneous")
        throw SchemaError(source + ": not a schedule file");
      continue;
    }
    if (text::trim(line).empty()) continue;
    const auto f = text::split_fields(line);
    auto bad = [&] { return ParseError(source + ":" + std::to_string(line_no) + ": bad row"); };
    if (f.size() != 8) throw bad();
    const auto t = text::parse_timestamp(f[0]);
    if (!t) throw bad();
    std::vector<double> v;
    for (std::size_t i = 1; i < 7; ++i) {
      const auto x = text::parse_number(f[i]);
      if (!x) throw bad();
      v.push_back(*x);
    }
    auto& s = out.schedule;
    if (s.soc.empty()) s.soc.push_back(v[3]);
    out.timestamps.push_back(*t);
    s.charge.push_back(v[0]);
    s.discharge.push_back(v[1]);
    s.reg_bid.push_back(v[2]);
    s.soc.push_back(v[4]);
    out.cashflow.push_back(v[5]);
    s.simultaneous.push_back(f[7] == "1");
  }
  if (line_no == 0) throw SchemaError(source + ": empty schedule file");
  return out;
}

inline nlohmann::json revenue_summary(const HorizonProblem& hp, const HorizonResult& res,
                                      const std::vector<std::string>& warnings = {}) {
  nlohmann::json j;
  j["status"] = lp::to_string(res.solution.status);
  j["mode"] = to_string(hp.mode);
  j["location"] = hp.prices.location;
  j["device"] = {{"name", hp.device.name},
                 {"eta_s", hp.device.eta_s},
                 {"eta_c", hp.device.eta_c},
                 {"energy_capacity", hp.device.energy_capacity},
                 {"power_rating", hp.device.power_rating},
                 {"initial_soc", hp.device.initial_soc}};
  j["steps"] = hp.horizon();
  j["dt_hours"] = hp.dt_hours;
  j["discount_rate"] = hp.discount_rate;
  j["terminal_policy"] = to_string(hp.terminal);
  j["iterations"] = res.solution.iterations;
  if (res.revenue) {
    j["objective"] = res.solution.objective_value;
    j["r_arb"] = res.revenue->r_arb;
    j["r_reg"] = res.revenue->r_reg;
    j["total_discounted"] = res.revenue->total_discounted;
  }
  nlohmann::json flags;
  std::vector<std::size_t> simultaneous;
  if (res.schedule)
    for (std::size_t t = 0; t < res.schedule->steps(); ++t)
      if (res.schedule->simultaneous[t]) simultaneous.push_back(t);
  flags["simultaneous_steps"] = simultaneous;
  flags["warnings"] = warnings;
  j["flags"] = flags;
  if (res.certificate) {
    const auto& c = *res.certificate;
    j["certificate"] = {{"passed", c.passed},
                        {"max_primal_violation", c.max_primal_violation},
                        {"max_dual_violation", c.max_dual_violation},
                        {"complementary_slackness", c.complementary_slackness},
                        {"duality_gap", c.duality_gap}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// SVG charts

namespace svg {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Bar {
  std::string series;  // legend entry
  double value;
};

struct Group {
  std::string label;
  std::vector<Bar> bars;
};

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[i % 10];
}

/// Grouped bar chart with a zero baseline; negative values draw downward.
inline std::string grouped_bars(const std::string& title, const std::string& y_label,
                                const std::vector<Group>& groups) {
  std::vector<std::string> series;
  double lo = 0.0, hi = 0.0;
  for (const auto& g : groups)
    for (const auto& b : g.bars) {
      if (std::find(series.begin(), series.end(), b.series) == series.end())
        series.push_back(b.series);
      lo = std::min(lo, b.value);
      hi = std::max(hi, b.value);
    }
  if (hi == lo) hi = lo + 1.0;
  const double left = 80, top = 50, plot_h = 300, bar_w = 18, gap = 30;
  const double group_w = std::max<double>(1, series.size()) * bar_w + gap;
  const double plot_w = std::max(200.0, groups.size() * group_w);
  const double legend_h = 20.0 * series.size();
  const double width = left + plot_w + 40, height = top + plot_h + 60 + legend_h;
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
     << "<title>" << escape(title) << "</title>\n"
     << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << escape(title) << "</text>\n"
     << "<text x=\"16\" y=\"" << num(top + plot_h / 2) << "\" font-size=\"12\" transform=\"rotate(-90 16 "
     << num(top + plot_h / 2) << ")\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    os << "<line x1=\"" << num(left) << "\" x2=\"" << num(left + plot_w) << "\" y1=\""
       << num(y_of(v)) << "\" y2=\"" << num(y_of(v)) << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y_of(v) + 4)
       << "\" font-size=\"10\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  os << "<line x1=\"" << num(left) << "\" x2=\"" << num(left + plot_w) << "\" y1=\""
     << num(y_of(0)) << "\" y2=\"" << num(y_of(0)) << "\" stroke=\"#000\"/>\n";
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const double x0 = left + gi * group_w + gap / 2;
    os << "<g class=\"bar-group\" data-label=\"" << escape(g.label) << "\">\n";
    for (const auto& b : g.bars) {
      const auto si = static_cast<std::size_t>(
          std::find(series.begin(), series.end(), b.series) - series.begin());
      const double y = std::min(y_of(b.value), y_of(0));
      const double h = std::abs(y_of(b.value) - y_of(0));
      os << "<rect x=\"" << num(x0 + si * bar_w) << "\" y=\"" << num(y) << "\" width=\""
         << num(bar_w - 2) << "\" height=\"" << num(h) << "\" fill=\"" << palette(si)
         << "\"><title>" << escape(g.label + " / " + b.series + ": " + num(b.value))
         << "</title></rect>\n";
    }
    os << "<text x=\"" << num(x0 + (group_w - gap) / 2) << "\" y=\"" << num(top + plot_h + 18)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << escape(g.label) << "</text>\n"
       << "</g>\n";
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double y = top + plot_h + 40 + 20.0 * si;
    os << "<rect x=\"" << num(left) << "\" y=\"" << num(y - 10) << "\" width=\"12\" height=\"12\" fill=\""
       << palette(si) << "\"/>\n"
       << "<text x=\"" << num(left + 18) << "\" y=\"" << num(y) << "\" font-size=\"11\">"
       << escape(series[si]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace svg

/// Mean daily revenue per device, one bar per (year, mode[, location]).
inline std::string revenue_chart(const std::vector<AggregateRow>& annual) {
  std::set<std::string> locations;
  for (const auto& r : annual) locations.insert(r.location);
  std::vector<svg::Group> groups;
  for (const auto& r : annual) {
    if (groups.empty() || groups.back().label != r.device) groups.push_back({r.device, {}});
    std::string series = r.period + " " + to_string(r.mode);
    if (locations.size() > 1) series += " @" + r.location;
    groups.back().bars.push_back({series, r.total});
  }
  return svg::grouped_bars("Average daily revenue by year and mode", "$/day", groups);
}

/// Year-over-year revenue change per device, one bar per mode[/location].
inline std::string yoy_chart(const std::vector<YoyRow>& rows, int year_a, int year_b) {
  std::set<std::string> locations;
  for (const auto& r : rows) locations.insert(r.location);
  std::vector<svg::Group> groups;
  for (const auto& r : rows) {
    if (groups.empty() || groups.back().label != r.device) groups.push_back({r.device, {}});
    if (!r.percent) continue;
    std::string series = to_string(r.mode);
    if (locations.size() > 1) series += " @" + r.location;
    groups.back().bars.push_back({series, *r.percent});
  }
  return svg::grouped_bars("Revenue change " + std::to_string(year_b) + " vs " +
                               std::to_string(year_a),
                           "%", groups);
}

}  // namespace essrev
