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

// JSON run configurations for the command-line front end. Unknown keys are
// rejected and referenced files must exist when the document is parsed.
// Relative paths resolve against the directory of the config file.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "essrev/campaign.hpp"
#include "essrev/device.hpp"
#include "essrev/errors.hpp"
#include "essrev/market_model.hpp"
#include "essrev/prices.hpp"
#include "essrev/text.hpp"

namespace essrev::config {

using nlohmann::json;
namespace fs = std::filesystem;

/// Reads keys from one JSON object and complains about leftovers.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + ": missing key \"" + key + "\"");
    return convert<T>(key);
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw ConfigError(where_ + ": unknown key \"" + key + "\"");
  }

 private:
  template <typename T>
  T convert(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + ": key \"" + key + "\" has the wrong type");
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

inline std::string resolve_path(const std::string& path, const fs::path& base,
                                const std::string& what) {
  fs::path p(path);
  if (p.is_relative()) p = base / p;
  std::error_code ec;
  if (!fs::exists(p, ec)) throw ConfigError(what + " not found: " + p.string());
  return fs::weakly_canonical(p).string();
}

inline DeviceSpec parse_device(const json& j, const std::string& where) {
  if (j.is_string()) return preset(j.get<std::string>());
  ObjectReader r(j, where);
  DeviceSpec d;
  if (r.has("preset")) d = preset(r.require<std::string>("preset"));
  d.name = r.get<std::string>("name", d.name);
  d.eta_s = r.get<double>("eta_s", d.eta_s);
  d.eta_c = r.get<double>("eta_c", d.eta_c);
  d.energy_capacity = r.get<double>("energy_capacity", d.energy_capacity);
  d.power_rating = r.get<double>("power_rating", d.power_rating);
  d.initial_soc = r.get<double>("initial_soc", d.initial_soc);
  r.finish();
  if (d.name.empty()) throw ConfigError(where + ": device needs a name or preset");
  const auto rep = validate(d);
  if (!rep.valid()) throw ConfigError(where + ": " + rep.errors.front());
  return d;
}

inline json device_json(const DeviceSpec& d) {
  return {{"name", d.name},
          {"eta_s", d.eta_s},
          {"eta_c", d.eta_c},
          {"energy_capacity", d.energy_capacity},
          {"power_rating", d.power_rating},
          {"initial_soc", d.initial_soc}};
}

inline CsvSchema parse_schema(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  CsvSchema s;
  s.time = r.get<std::string>("time", s.time);
  s.location = r.get<std::string>("location", s.location);
  s.lmp = r.get<std::string>("lmp", s.lmp);
  s.rcp = r.get<std::string>("rcp", s.rcp);
  s.rmp = r.get<std::string>("rmp", s.rmp);
  const auto delim = r.get<std::string>("delimiter", std::string(1, s.delimiter));
  if (delim.size() != 1) throw ConfigError(where + ": delimiter must be one character");
  s.delimiter = delim[0];
  r.finish();
  return s;
}

inline json schema_json(const CsvSchema& s) {
  return {{"time", s.time}, {"location", s.location}, {"lmp", s.lmp},
          {"rcp", s.rcp},   {"rmp", s.rmp},           {"delimiter", std::string(1, s.delimiter)}};
}

inline RegulationDefaults parse_regulation(ObjectReader& r, std::string* override_file,
                                           const fs::path& base) {
  RegulationDefaults d;
  d.delta_ru = r.get<double>("delta_ru", d.delta_ru);
  d.delta_rd = r.get<double>("delta_rd", d.delta_rd);
  d.gamma = r.get<double>("gamma", d.gamma);
  d.penalty_factor = r.get<double>("penalty_factor", d.penalty_factor);
  const auto file = r.get<std::string>("override_file", "");
  if (!file.empty()) *override_file = resolve_path(file, base, "regulation override file");
  r.finish();
  return d;
}

inline json regulation_json(const RegulationDefaults& d, const std::string& override_file) {
  json j = {{"delta_ru", d.delta_ru},
            {"delta_rd", d.delta_rd},
            {"gamma", d.gamma},
            {"penalty_factor", d.penalty_factor}};
  if (!override_file.empty()) j["override_file"] = override_file;
  return j;
}

/// CSV with columns time,delta_ru,delta_rd,gamma.
inline RegulationOverrides load_regulation_overrides(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open regulation override file " + path);
  RegulationOverrides out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto f = text::split_fields(line);
    if (line_no == 1) {
      if (f != std::vector<std::string>{"time", "delta_ru", "delta_rd", "gamma"})
        throw SchemaError(path + ": header must be time,delta_ru,delta_rd,gamma");
      continue;
    }
    const auto t = f.size() == 4 ? text::parse_timestamp(f[0]) : std::nullopt;
    const auto a = f.size() == 4 ? text::parse_number(f[1]) : std::nullopt;
    const auto b = f.size() == 4 ? text::parse_number(f[2]) : std::nullopt;
    const auto g = f.size() == 4 ? text::parse_number(f[3]) : std::nullopt;
    if (!t || !a || !b || !g)
      throw ParseError(path + ":" + std::to_string(line_no) + ": bad regulation row");
    out[*t] = {*a, *b, *g};
  }
  return out;
}

// ---------------------------------------------------------------------------
// single-horizon solve

struct SolveSettings {
  std::string prices_path;
  CsvSchema schema = CsvSchema::canonical();
  std::string location;  // empty: the file's only location
  std::optional<DeviceSpec> device;
  Mode mode = Mode::arbitrage;
  double dt_hours = 0.0;  // 0: keep the file's step
  double discount_rate = 0.0;
  TerminalPolicy terminal = TerminalPolicy::free;
  RegulationDefaults regulation;
  std::string regulation_file;
  std::string start;  // optional first timestamp
  int steps = 0;      // 0: to the end of the series
  std::string out_dir = ".";
  std::string dump_lp;
};

template <typename T, typename Parse>
T parse_enum(const std::string& s, Parse parse, const std::string& what) {
  const auto v = parse(s);
  if (!v) throw ConfigError("invalid " + what + " \"" + s + "\"");
  return *v;
}

inline SolveSettings parse_solve(const json& j, const fs::path& base) {
  ObjectReader r(j, "solve config");
  SolveSettings s;
  if (r.has("prices")) s.prices_path = resolve_path(r.require<std::string>("prices"), base, "price file");
  if (r.has("schema")) s.schema = parse_schema(r.raw("schema"), "schema");
  s.location = r.get<std::string>("location", s.location);
  if (r.has("device")) s.device = parse_device(r.raw("device"), "device");
  if (r.has("mode")) s.mode = parse_enum<Mode>(r.require<std::string>("mode"), parse_mode, "mode");
  s.dt_hours = r.get<double>("dt_hours", s.dt_hours);
  s.discount_rate = r.get<double>("discount", s.discount_rate);
  if (r.has("terminal"))
    s.terminal = parse_enum<TerminalPolicy>(r.require<std::string>("terminal"),
                                            parse_terminal_policy, "terminal policy");
  if (r.has("regulation")) {
    ObjectReader rr(r.raw("regulation"), "regulation");
    s.regulation = parse_regulation(rr, &s.regulation_file, base);
  }
  s.start = r.get<std::string>("start", s.start);
  s.steps = r.get<int>("steps", s.steps);
  s.out_dir = r.get<std::string>("out_dir", s.out_dir);
  s.dump_lp = r.get<std::string>("dump_lp", s.dump_lp);
  r.finish();
  return s;
}

// ---------------------------------------------------------------------------
// campaigns

struct LocationSource {
  std::string name;
  std::string path;
  CsvSchema schema = CsvSchema::canonical();
  std::string file_location;  // location label inside the file; defaults to name
};

struct CampaignSettings {
  CampaignConfig config;
  std::vector<LocationSource> sources;
  double dt_hours = 1.0;
  std::string regulation_file;
  std::optional<std::pair<int, int>> yoy;
  std::string out_dir = ".";
  bool plot = false;
};

inline CampaignSettings parse_campaign(const json& j, const fs::path& base) {
  ObjectReader r(j, "campaign config");
  CampaignSettings s;
  auto& c = s.config;
  const auto start = text::parse_date(r.require<std::string>("start"));
  const auto end = text::parse_date(r.require<std::string>("end"));
  if (!start || !end) throw ConfigError("campaign dates must be YYYY-MM-DD");
  c.first_day = *start;
  c.last_day = *end;
  if (c.last_day < c.first_day) throw ConfigError("campaign end precedes start");

  const auto& devices = r.raw("devices");
  if (!devices.is_array()) throw ConfigError("devices must be an array");
  for (std::size_t i = 0; i < devices.size(); ++i)
    c.devices.push_back(parse_device(devices[i], "devices[" + std::to_string(i) + "]"));

  if (!r.has("locations")) throw ConfigError("campaign config: missing key \"locations\"");
  const auto& locs = r.raw("locations");
  if (!locs.is_array()) throw ConfigError("locations must be an array");
  for (std::size_t i = 0; i < locs.size(); ++i) {
    const std::string where = "locations[" + std::to_string(i) + "]";
    ObjectReader lr(locs[i], where);
    LocationSource src;
    src.name = lr.require<std::string>("name");
    src.path = resolve_path(lr.require<std::string>("prices"), base, where + " price file");
    if (lr.has("schema")) src.schema = parse_schema(lr.raw("schema"), where + ".schema");
    src.file_location = lr.get<std::string>("file_location", src.name);
    lr.finish();
    c.locations.push_back(src.name);
    s.sources.push_back(std::move(src));
  }

  if (!r.has("modes")) throw ConfigError("campaign config: missing key \"modes\"");
  for (const auto& m : r.raw("modes")) {
    if (!m.is_string()) throw ConfigError("modes must be strings");
    c.modes.push_back(parse_enum<Mode>(m.get<std::string>(), parse_mode, "mode"));
  }
  if (r.has("soc_policy"))
    c.soc_policy = parse_enum<SocPolicy>(r.require<std::string>("soc_policy"), parse_soc_policy,
                                         "soc policy");
  c.horizon_hours = r.get<int>("horizon_hours", c.horizon_hours);
  s.dt_hours = r.get<double>("dt_hours", s.dt_hours);
  if (r.has("regulation")) {
    ObjectReader rr(r.raw("regulation"), "regulation");
    c.regulation = parse_regulation(rr, &s.regulation_file, base);
  }
  c.discount_rate = r.get<double>("discount", c.discount_rate);
  if (r.has("terminal"))
    c.terminal = parse_enum<TerminalPolicy>(r.require<std::string>("terminal"),
                                            parse_terminal_policy, "terminal policy");
  c.workers = r.get<unsigned>("workers", c.workers);
  if (r.has("yoy")) {
    const auto years = r.require<std::vector<int>>("yoy");
    if (years.size() != 2) throw ConfigError("yoy must list two years");
    s.yoy = std::pair{years[0], years[1]};
  }
  s.out_dir = r.get<std::string>("out_dir", s.out_dir);
  s.plot = r.get<bool>("plot", s.plot);
  r.finish();
  return s;
}

/// Fully explicit form of `s`; parse_campaign(campaign_json(s)) == s.
inline json campaign_json(const CampaignSettings& s) {
  const auto& c = s.config;
  json j;
  j["start"] = text::format_date(c.first_day);
  j["end"] = text::format_date(c.last_day);
  j["devices"] = json::array();
  for (const auto& d : c.devices) j["devices"].push_back(device_json(d));
  j["locations"] = json::array();
  for (const auto& src : s.sources)
    j["locations"].push_back({{"name", src.name},
                              {"prices", src.path},
                              {"schema", schema_json(src.schema)},
                              {"file_location", src.file_location}});
  j["modes"] = json::array();
  for (Mode m : c.modes) j["modes"].push_back(to_string(m));
  j["soc_policy"] = to_string(c.soc_policy);
  j["horizon_hours"] = c.horizon_hours;
  j["dt_hours"] = s.dt_hours;
  j["regulation"] = regulation_json(c.regulation, s.regulation_file);
  j["discount"] = c.discount_rate;
  j["terminal"] = to_string(c.terminal);
  j["workers"] = c.workers;
  if (s.yoy) j["yoy"] = {s.yoy->first, s.yoy->second};
  j["out_dir"] = s.out_dir;
  j["plot"] = s.plot;
  return j;
}

/// Loads and resamples every location's prices for a campaign.
inline PriceStore load_campaign_prices(const CampaignSettings& s) {
  PriceStore store;
  for (const auto& src : s.sources) {
    auto series = load_prices(src.path, src.schema, {.allow_irregular = true}, src.file_location);
    series = resample(series, s.dt_hours);
    series.location = src.name;
    store[src.name] = std::move(series);
  }
  return store;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace essrev::config
