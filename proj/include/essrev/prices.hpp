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
 *  \brief Market price series: CSV ingestion, resampling and synthetic scenarios.
 *
 *  A PriceSeries carries one location's energy price (LMP) and, optionally,
 *  the regulation capacity price (RCP) and regulation movement price (RMP)
 *  on a fixed step. Price at index t applies to the interval
 *  [timestamps[t], timestamps[t] + step).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "essrev/errors.hpp"
#include "essrev/text.hpp"

namespace essrev {

struct PriceSeries {
  std::string location;
  std::string provenance;  // free text, e.g. "day-ahead LMP"
  std::int64_t step_seconds = 3600;
  std::vector<std::int64_t> timestamps;
  std::vector<double> lmp;
  std::optional<std::vector<double>> rcp;
  std::optional<std::vector<double>> rmp;

  std::size_t size() const { return timestamps.size(); }
  bool empty() const { return timestamps.empty(); }
  double dt_hours() const { return static_cast<double>(step_seconds) / 3600.0; }

  bool is_regular() const {
    for (std::size_t i = 1; i < timestamps.size(); ++i)
      if (timestamps[i] - timestamps[i - 1] != step_seconds) return false;
    return true;
  }

  /// Position of `t` on the regular grid, if covered.
  std::optional<std::size_t> index_of(std::int64_t t) const {
    if (empty() || t < timestamps.front()) return std::nullopt;
    const std::int64_t off = t - timestamps.front();
    if (off % step_seconds != 0) return std::nullopt;
    const auto idx = static_cast<std::size_t>(off / step_seconds);
    if (idx >= size() || timestamps[idx] != t) return std::nullopt;
    return idx;
  }

  bool operator==(const PriceSeries&) const = default;
};

/// Throws SeriesError if `s` breaks the PriceSeries invariants. Irregular
/// spacing is tolerated only when `require_regular` is false.
inline void validate(const PriceSeries& s, bool require_regular = true) {
  if (s.step_seconds <= 0) throw SeriesError("series step must be positive");
  if (s.lmp.size() != s.timestamps.size())
    throw SeriesError("lmp length does not match timestamp count");
  if (s.rcp && s.rcp->size() != s.timestamps.size())
    throw SeriesError("rcp length does not match timestamp count");
  if (s.rmp && s.rmp->size() != s.timestamps.size())
    throw SeriesError("rmp length does not match timestamp count");
  for (std::size_t i = 1; i < s.timestamps.size(); ++i)
    if (s.timestamps[i] <= s.timestamps[i - 1])
      throw SeriesError("timestamps are not strictly increasing at index " + std::to_string(i));
  if (require_regular && !s.is_regular())
    throw AlignmentError("series for '" + s.location +
                         "' has mixed intervals; resample it to a fixed step");
  auto finite = [&](const std::vector<double>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!std::isfinite(v[i]))
        throw SeriesError(std::string(what) + " value at index " + std::to_string(i) +
                          " is not finite");
  };
  finite(s.lmp, "lmp");
  if (s.rcp) finite(*s.rcp, "rcp");
  if (s.rmp) finite(*s.rmp, "rmp");
}

/// Contiguous sub-series [first, first + count).
inline PriceSeries slice(const PriceSeries& s, std::size_t first, std::size_t count) {
  if (first + count > s.size()) throw SeriesError("slice exceeds series length");
  PriceSeries out;
  out.location = s.location;
  out.provenance = s.provenance;
  out.step_seconds = s.step_seconds;
  auto cut = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first),
                               v.begin() + static_cast<std::ptrdiff_t>(first + count));
  };
  out.timestamps.assign(s.timestamps.begin() + static_cast<std::ptrdiff_t>(first),
                        s.timestamps.begin() + static_cast<std::ptrdiff_t>(first + count));
  out.lmp = cut(s.lmp);
  if (s.rcp) out.rcp = cut(*s.rcp);
  if (s.rmp) out.rmp = cut(*s.rmp);
  return out;
}

/// Column mapping for price CSVs. Empty optional names mean "absent".
struct CsvSchema {
  std::string time = "time";
  std::string location = "location";  // empty: whole file is `default_location`
  std::string lmp = "lmp";
  std::string rcp;
  std::string rmp;
  char delimiter = ',';
  std::string default_location = "default";
  std::int64_t default_step_seconds = 3600;  // used for single-row series

  /// Layout written by write_prices.
  static CsvSchema canonical() {
    CsvSchema s;
    s.rcp = "rcp";
    s.rmp = "rmp";
    return s;
  }
};

struct LoadOptions {
  bool allow_irregular = false;  // leave mixed spacing for resample to handle
};

using PriceStore = std::map<std::string, PriceSeries>;

namespace detail {

struct RawRow {
  std::int64_t t;
  double lmp;
  std::optional<double> rcp;
  std::optional<double> rmp;
};

inline PriceSeries assemble(const std::string& location, std::vector<RawRow> rows,
                            const CsvSchema& schema, bool has_rcp, bool has_rmp,
                            const LoadOptions& opts) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const RawRow& a, const RawRow& b) { return a.t < b.t; });
  PriceSeries s;
  s.location = location;
  if (has_rcp) s.rcp.emplace();
  if (has_rmp) s.rmp.emplace();
  // Duplicated instants (repeated DST hour) are averaged.
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    double lmp = 0, rcp = 0, rmp = 0;
    std::size_t n_rcp = 0, n_rmp = 0;
    while (j < rows.size() && rows[j].t == rows[i].t) {
      lmp += rows[j].lmp;
      if (rows[j].rcp) rcp += *rows[j].rcp, ++n_rcp;
      if (rows[j].rmp) rmp += *rows[j].rmp, ++n_rmp;
      ++j;
    }
    const double n = static_cast<double>(j - i);
    s.timestamps.push_back(rows[i].t);
    s.lmp.push_back(lmp / n);
    if (has_rcp) {
      if (n_rcp == 0)
        throw ParseError("missing rcp value at " + text::format_timestamp(rows[i].t));
      s.rcp->push_back(rcp / static_cast<double>(n_rcp));
    }
    if (has_rmp) {
      if (n_rmp == 0)
        throw ParseError("missing rmp value at " + text::format_timestamp(rows[i].t));
      s.rmp->push_back(rmp / static_cast<double>(n_rmp));
    }
    i = j;
  }
  if (s.timestamps.size() >= 2) {
    std::int64_t step = s.timestamps[1] - s.timestamps[0];
    for (std::size_t i = 2; i < s.timestamps.size(); ++i)
      step = std::min(step, s.timestamps[i] - s.timestamps[i - 1]);
    s.step_seconds = step;
  } else {
    s.step_seconds = schema.default_step_seconds;
  }
  validate(s, !opts.allow_irregular);
  return s;
}

}  // namespace detail

/// Parses every location in a price CSV read from `in`. `source` labels
/// error messages.
inline PriceStore read_price_table(std::istream& in, const CsvSchema& schema,
                                   const LoadOptions& opts = {},
                                   const std::string& source = "<input>") {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (text::trim(line).empty()) continue;
    header = text::split_fields(line, schema.delimiter);
    break;
  }
  if (header.empty()) throw SchemaError(source + ": file has no header row");
  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    if (name.empty()) return std::nullopt;
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    if (required) throw SchemaError(source + ": missing column \"" + name + "\"");
    return std::nullopt;
  };
  const auto c_time = column(schema.time, true);
  const auto c_loc = column(schema.location, true);
  const auto c_lmp = column(schema.lmp, true);
  const auto c_rcp = column(schema.rcp, false);  // optional series
  const auto c_rmp = column(schema.rmp, false);
  if (!c_time) throw SchemaError(source + ": schema must name a time column");
  if (!c_lmp) throw SchemaError(source + ": schema must name an lmp column");

  std::map<std::string, std::vector<detail::RawRow>> by_loc;
  std::map<std::string, std::pair<bool, bool>> optional_cols;  // rcp seen, rmp seen
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto f = text::split_fields(line, schema.delimiter);
    auto field = [&](std::size_t c) -> const std::string& {
      if (c >= f.size())
        throw ParseError(source + ":" + std::to_string(line_no) + ": expected at least " +
                         std::to_string(c + 1) + " fields");
      return f[c];
    };
    auto number = [&](std::size_t c, const std::string& what) {
      const auto v = text::parse_number(field(c));
      if (!v || !std::isfinite(*v))
        throw ParseError(source + ":" + std::to_string(line_no) + ": cannot parse " + what +
                         " value \"" + field(c) + "\"");
      return *v;
    };
    auto optional_number = [&](std::optional<std::size_t> c,
                               const std::string& what) -> std::optional<double> {
      if (!c || field(*c).empty()) return std::nullopt;
      return number(*c, what);
    };
    detail::RawRow row{};
    const auto t = text::parse_timestamp(field(*c_time));
    if (!t)
      throw ParseError(source + ":" + std::to_string(line_no) + ": cannot parse timestamp \"" +
                       field(*c_time) + "\"");
    row.t = *t;
    row.lmp = number(*c_lmp, schema.lmp);
    row.rcp = optional_number(c_rcp, schema.rcp);
    row.rmp = optional_number(c_rmp, schema.rmp);
    const std::string loc = c_loc ? field(*c_loc) : schema.default_location;
    auto& seen = optional_cols[loc];
    seen.first = seen.first || row.rcp.has_value();
    seen.second = seen.second || row.rmp.has_value();
    by_loc[loc].push_back(row);
  }
  PriceStore store;
  for (auto& [loc, rows] : by_loc) {
    const auto [has_rcp, has_rmp] = optional_cols[loc];
    auto s = detail::assemble(loc, std::move(rows), schema, has_rcp, has_rmp, opts);
    s.provenance = source;
    store.emplace(loc, std::move(s));
  }
  return store;
}

inline PriceStore load_price_table(const std::string& path, const CsvSchema& schema,
                                   const LoadOptions& opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open price file " + path);
  return read_price_table(in, schema, opts, path);
}

/// Loads a single location from `path`. With an empty `location` the file
/// must hold exactly one.
inline PriceSeries load_prices(const std::string& path, const CsvSchema& schema,
                               const LoadOptions& opts = {}, const std::string& location = {}) {
  auto store = load_price_table(path, schema, opts);
  if (!location.empty()) {
    auto it = store.find(location);
    if (it == store.end())
      throw SchemaError(path + ": no rows for location \"" + location + "\"");
    return std::move(it->second);
  }
  if (store.size() != 1)
    throw SchemaError(path + ": file holds " + std::to_string(store.size()) +
                      " locations; choose one");
  return std::move(store.begin()->second);
}

/// Canonical CSV: time,location,lmp,rcp,rmp (absent series leave empty cells).
inline void write_prices(std::ostream& os, const PriceSeries& s, bool header = true) {
  if (header) os << "time,location,lmp,rcp,rmp\n";
  const std::string loc = text::quote_field(s.location);
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << text::format_timestamp(s.timestamps[i]) << ',' << loc << ','
       << text::format_number(s.lmp[i]) << ',';
    if (s.rcp) os << text::format_number((*s.rcp)[i]);
    os << ',';
    if (s.rmp) os << text::format_number((*s.rmp)[i]);
    os << '\n';
  }
}

inline std::string fingerprint(const PriceSeries& s) {
  std::ostringstream os;
  write_prices(os, s);
  return text::hex64(text::fnv1a(os.str()));
}

/// Re-buckets `s` onto a `dt_hours` grid aligned to midnight. Finer samples
/// are averaged per bucket, coarser samples are held across the buckets
/// they span, and runs of up to `max_fill` empty buckets are filled by
/// linear interpolation. Longer gaps throw GapError.
inline PriceSeries resample(const PriceSeries& s, double dt_hours, int max_fill = 3) {
  validate(s, false);
  if (s.empty()) throw SeriesError("cannot resample an empty series");
  if (!(dt_hours > 0.0) || !std::isfinite(dt_hours))
    throw SeriesError("resample step must be positive");
  const double dt_seconds = dt_hours * 3600.0;
  const auto target = static_cast<std::int64_t>(std::llround(dt_seconds));
  if (target <= 0 || std::abs(dt_seconds - static_cast<double>(target)) > 1e-6)
    throw SeriesError("resample step must be a whole number of seconds");

  const std::int64_t src = s.step_seconds;
  if (src >= target ? src % target != 0 : target % src != 0)
    throw AlignmentError("series step " + std::to_string(src) + " s and target step " +
                         std::to_string(target) + " s are not commensurate");

  const std::int64_t first = text::floor_div(s.timestamps.front(), target);
  const std::int64_t last_end =
      src >= target ? s.timestamps.back() + src - target : s.timestamps.back();
  const std::int64_t last = text::floor_div(last_end, target);
  const auto n = static_cast<std::size_t>(last - first + 1);

  struct Acc {
    double lmp = 0, rcp = 0, rmp = 0;
    int count = 0;
  };
  std::vector<Acc> acc(n);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::int64_t t = s.timestamps[i];
    auto add = [&](std::int64_t bucket) {
      auto& a = acc[static_cast<std::size_t>(bucket - first)];
      a.lmp += s.lmp[i];
      if (s.rcp) a.rcp += (*s.rcp)[i];
      if (s.rmp) a.rmp += (*s.rmp)[i];
      ++a.count;
    };
    if (src >= target) {
      if (t % target != 0)
        throw AlignmentError("sample at " + text::format_timestamp(t) +
                             " is not aligned to the target step");
      for (std::int64_t k = 0; k < src / target; ++k) add(t / target + k);
    } else {
      add(text::floor_div(t, target));
    }
  }

  PriceSeries out;
  out.location = s.location;
  out.provenance = s.provenance;
  out.step_seconds = target;
  out.timestamps.resize(n);
  out.lmp.resize(n);
  if (s.rcp) out.rcp.emplace(n);
  if (s.rmp) out.rmp.emplace(n);
  for (std::size_t b = 0; b < n; ++b) {
    out.timestamps[b] = (first + static_cast<std::int64_t>(b)) * target;
    if (acc[b].count == 0) continue;
    const double c = acc[b].count;
    out.lmp[b] = acc[b].lmp / c;
    if (s.rcp) (*out.rcp)[b] = acc[b].rcp / c;
    if (s.rmp) (*out.rmp)[b] = acc[b].rmp / c;
  }
  // The first and last buckets always hold data, so every gap has neighbours.
  for (std::size_t b = 0; b < n;) {
    if (acc[b].count > 0) {
      ++b;
      continue;
    }
    std::size_t e = b;
    while (acc[e].count == 0) ++e;
    const std::size_t len = e - b;
    if (len > static_cast<std::size_t>(max_fill))
      throw GapError("gap of " + std::to_string(len) + " steps in '" + s.location + "' from " +
                     text::format_timestamp(out.timestamps[b]) + " to " +
                     text::format_timestamp(out.timestamps[e - 1]));
    auto fill = [&](std::vector<double>& v) {
      const double lo = v[b - 1], hi = v[e];
      for (std::size_t k = b; k < e; ++k) {
        const double w = static_cast<double>(k - b + 1) / static_cast<double>(len + 1);
        v[k] = lo + w * (hi - lo);
      }
    };
    fill(out.lmp);
    if (out.rcp) fill(*out.rcp);
    if (out.rmp) fill(*out.rmp);
    b = e;
  }
  return out;
}

/// Multiplies every price in [first_day, last_day] (days since epoch,
/// inclusive) by `factor`.
struct SuppressionWindow {
  std::int64_t first_day = 0;
  std::int64_t last_day = 0;
  double factor = 1.0;
};

struct SyntheticConfig {
  std::string location = "SYNTH";
  std::int64_t start_day = text::days_from_civil(2019, 1, 1);
  int days = 365;
  double dt_hours = 1.0;
  double base = 40.0;       // $/MWh
  double amplitude = 15.0;  // daily sinusoid, $/MWh
  double noise = 5.0;       // std-dev of additive lmp noise
  double reg_ratio = 0.3;   // rcp = ratio * |lmp| + noise
  double reg_noise = 1.0;
  std::vector<SuppressionWindow> suppression;
  // Key the noise stream on (month, day) instead of the absolute date, so
  // every non-leap year repeats the same pattern.
  bool annual_noise_cycle = false;
};

inline void validate(const SyntheticConfig& c) {
  if (c.days <= 0) throw SeriesError("synthetic scenario needs at least one day");
  if (!(c.dt_hours > 0.0)) throw SeriesError("synthetic step must be positive");
  const double steps = 24.0 / c.dt_hours;
  if (std::abs(steps - std::round(steps)) > 1e-9)
    throw SeriesError("synthetic step must divide 24 hours");
  if (!(c.noise >= 0.0) || !(c.reg_noise >= 0.0))
    throw SeriesError("noise levels must be non-negative");
  if (!(c.amplitude >= 0.0)) throw SeriesError("amplitude must be non-negative");
  if (!std::isfinite(c.base) || !std::isfinite(c.reg_ratio) || c.reg_ratio < 0.0)
    throw SeriesError("base price and regulation ratio must be finite (ratio >= 0)");
  for (const auto& w : c.suppression) {
    if (!(w.factor > 0.0 && w.factor <= 1.0))
      throw SeriesError("suppression factor must lie in (0, 1]");
    if (w.last_day < w.first_day) throw SeriesError("suppression window ends before it starts");
  }
}

/// Deterministic daily-sinusoid scenario. Non-fatal remarks (all prices
/// negative) are appended to `warnings` when given.
inline PriceSeries gen_synthetic(const SyntheticConfig& c, std::uint64_t seed,
                                 std::vector<std::string>* warnings = nullptr) {
  validate(c);
  const auto per_day = static_cast<int>(std::llround(24.0 / c.dt_hours));
  const auto step = static_cast<std::int64_t>(std::llround(c.dt_hours * 3600.0));
  PriceSeries s;
  s.location = c.location;
  s.provenance = "synthetic seed=" + std::to_string(seed);
  s.step_seconds = step;
  s.rcp.emplace();
  const auto total = static_cast<std::size_t>(c.days) * static_cast<std::size_t>(per_day);
  s.timestamps.reserve(total);
  s.lmp.reserve(total);
  s.rcp->reserve(total);
  for (int d = 0; d < c.days; ++d) {
    const std::int64_t day = c.start_day + d;
    const auto civil = text::civil_from_days(day);
    const std::uint64_t key = c.annual_noise_cycle
                                  ? civil.month * 32u + civil.day
                                  : static_cast<std::uint64_t>(day) + (1ULL << 40);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);
    double factor = 1.0;
    for (const auto& w : c.suppression)
      if (day >= w.first_day && day <= w.last_day) factor *= w.factor;
    for (int k = 0; k < per_day; ++k) {
      const double hour = k * c.dt_hours;
      const double lmp = c.base + c.amplitude * std::sin(2.0 * std::numbers::pi * hour / 24.0) +
                         c.noise * noise(rng);
      const double rcp = std::max(0.0, c.reg_ratio * std::abs(lmp) + c.reg_noise * noise(rng));
      s.timestamps.push_back(day * text::kSecondsPerDay + k * step);
      s.lmp.push_back(lmp * factor);
      s.rcp->push_back(rcp * factor);
    }
  }
  if (warnings && *std::max_element(s.lmp.begin(), s.lmp.end()) < 0.0)
    warnings->push_back("every generated energy price is negative");
  validate(s);
  return s;
}

}  // namespace essrev
