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

// Number, CSV-field and timestamp helpers shared by the file formats.
// Timestamps are seconds since 1970-01-01T00:00:00 on a naive (market-local)
// clock; no timezone conversion is ever applied.

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace essrev::text {

/// Shortest decimal form that parses back to the same double.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Splits one CSV record. Double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_fields(std::string_view line, char delim = ',') {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::string quote_field(const std::string& s, char delim = ',') {
  if (s.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  return sys_days{year_month_day{year{y}, month{m}, day{d}}}.time_since_epoch().count();
}

struct CivilDate {
  int year;
  unsigned month;
  unsigned day;
};

inline CivilDate civil_from_days(std::int64_t days) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day())};
}

inline bool valid_civil(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  return year_month_day{year{y}, month{m}, day{d}}.ok();
}

inline constexpr std::int64_t kSecondsPerDay = 86400;

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::string format_date(std::int64_t days) {
  const auto c = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
  return buf;
}

/// ISO-8601 "YYYY-MM-DDTHH:MM:SS".
inline std::string format_timestamp(std::int64_t t) {
  const std::int64_t days = floor_div(t, kSecondsPerDay);
  const std::int64_t sec = t - days * kSecondsPerDay;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%sT%02d:%02d:%02d", format_date(days).c_str(),
                static_cast<int>(sec / 3600), static_cast<int>(sec / 60 % 60),
                static_cast<int>(sec % 60));
  return buf;
}

namespace detail {
inline bool read_uint(std::string_view s, std::size_t& pos, std::size_t width, unsigned& out,
                      bool exact = true) {
  std::size_t n = 0;
  unsigned v = 0;
  while (pos + n < s.size() && n < width && s[pos + n] >= '0' && s[pos + n] <= '9') {
    v = v * 10 + static_cast<unsigned>(s[pos + n] - '0');
    ++n;
  }
  if (n == 0 || (exact && n != width)) return false;
  pos += n;
  out = v;
  return true;
}
inline bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}
// Parses "HH:MM[:SS]" starting at pos.
inline bool read_clock(std::string_view s, std::size_t& pos, std::int64_t& secs) {
  unsigned hh = 0, mm = 0, ss = 0;
  if (!read_uint(s, pos, 2, hh, false) || !expect(s, pos, ':') || !read_uint(s, pos, 2, mm))
    return false;
  if (expect(s, pos, ':') && !read_uint(s, pos, 2, ss)) return false;
  if (hh > 24 || mm > 59 || ss > 60) return false;
  secs = hh * 3600 + mm * 60 + ss;
  return true;
}
}  // namespace detail

/// Accepts "YYYY-MM-DD[( |T)HH:MM[:SS]][Z]", "MM/DD/YYYY[ HH:MM[:SS]]" or an
/// integer count of epoch seconds.
inline std::optional<std::int64_t> parse_timestamp(std::string_view raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  bool digits = true;
  for (std::size_t i = 0; i < s.size(); ++i)
    digits = digits && ((s[i] >= '0' && s[i] <= '9') || (i == 0 && s[i] == '-' && s.size() > 1));
  if (digits) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc()) return std::nullopt;
    return v;
  }
  std::size_t pos = 0;
  unsigned y = 0, mo = 0, d = 0;
  if (s.size() >= 10 && s[4] == '-') {
    if (!detail::read_uint(s, pos, 4, y) || !detail::expect(s, pos, '-') ||
        !detail::read_uint(s, pos, 2, mo) || !detail::expect(s, pos, '-') ||
        !detail::read_uint(s, pos, 2, d))
      return std::nullopt;
  } else {
    if (!detail::read_uint(s, pos, 2, mo, false) || !detail::expect(s, pos, '/') ||
        !detail::read_uint(s, pos, 2, d, false) || !detail::expect(s, pos, '/') ||
        !detail::read_uint(s, pos, 4, y))
      return std::nullopt;
  }
  if (!valid_civil(static_cast<int>(y), mo, d)) return std::nullopt;
  std::int64_t secs = 0;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    ++pos;
    if (!detail::read_clock(s, pos, secs)) return std::nullopt;
  }
  if (pos < s.size() && s[pos] == 'Z') ++pos;
  if (pos != s.size()) return std::nullopt;
  return days_from_civil(static_cast<int>(y), mo, d) * kSecondsPerDay + secs;
}

/// "YYYY-MM-DD" to days since epoch.
inline std::optional<std::int64_t> parse_date(std::string_view raw) {
  const std::string s = trim(raw);
  if (s.size() != 10) return std::nullopt;
  const auto t = parse_timestamp(s);
  if (!t) return std::nullopt;
  return *t / kSecondsPerDay;
}

/// 64-bit FNV-1a, used for config hashes and data fingerprints.
inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace essrev::text
