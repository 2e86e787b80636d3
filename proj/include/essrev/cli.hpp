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

// Command-line front end: solve, gen, campaign, report.
//
// Exit codes: 0 success, 1 usage/config/input error, 2 solve failure
// (infeasible or unbounded horizon, numerical trouble) or coverage gaps.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "essrev/campaign.hpp"
#include "essrev/config.hpp"
#include "essrev/device.hpp"
#include "essrev/errors.hpp"
#include "essrev/lp/problem.hpp"
#include "essrev/market_model.hpp"
#include "essrev/prices.hpp"
#include "essrev/report.hpp"
#include "essrev/text.hpp"

#ifndef ESSREV_VERSION
#define ESSREV_VERSION "dev"
#endif

namespace essrev::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitSolve = 2;

/// Thrown for a horizon that has no optimal solution.
class SolveFailure : public Error {
 public:
  explicit SolveFailure(const std::string& what) : Error("market_model", what) {}
};

inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const SolveFailure*>(&e) || dynamic_cast<const CoverageError*>(&e) || dynamic_cast<const NumericError*>(&e) ||
      dynamic_cast<const ConsistencyError*>(&e) || dynamic_cast<const SettlementError*>(&e) ||
      dynamic_cast<const SolutionContractError*>(&e) || dynamic_cast<const ContractError*>(&e))
    return kExitSolve;
  return kExitUsage;
}

namespace detail {

inline void write_file(const fs::path& path, const std::string& content,
                       const std::set<std::string>& inputs = {}) {
  std::error_code ec;
  if (fs::exists(path, ec) && inputs.count(fs::weakly_canonical(path).string()))
    throw ConfigError("refusing to overwrite input file " + path.string());
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << content;
  if (!os) throw ConfigError("failed writing " + path.string());
}

inline fs::path config_dir(const std::string& path) {
  return fs::absolute(fs::path(path)).parent_path();
}

struct SchemaFlags {
  std::optional<std::string> time, location, lmp, rcp, rmp, delimiter;

  void add_to(CLI::App* app) {
    app->add_option("--time-col", time, "Timestamp column name");
    app->add_option("--location-col", location, "Location column name (empty: none)");
    app->add_option("--lmp-col", lmp, "Energy price column name");
    app->add_option("--rcp-col", rcp, "Regulation capacity price column name");
    app->add_option("--rmp-col", rmp, "Regulation mileage price column name");
    app->add_option("--delimiter", delimiter, "Field delimiter");
  }

  void apply(CsvSchema& s) const {
    if (time) s.time = *time;
    if (location) s.location = *location;
    if (lmp) s.lmp = *lmp;
    if (rcp) s.rcp = *rcp;
    if (rmp) s.rmp = *rmp;
    if (delimiter) {
      if (delimiter->size() != 1) throw ConfigError("delimiter must be one character");
      s.delimiter = (*delimiter)[0];
    }
  }
};

// "2020-03:2020-12=0.6" or full dates; a month start/end covers the whole month.
inline SuppressionWindow parse_suppression(const std::string& arg) {
  auto bad = [&] {
    return ConfigError("invalid suppression \"" + arg + "\" (expected START:END=FACTOR)");
  };
  const auto eq = arg.find('=');
  const auto colon = arg.find(':');
  if (eq == std::string::npos || colon == std::string::npos || colon > eq) throw bad();
  auto day_of = [&](std::string s, bool end) -> std::int64_t {
    if (s.size() == 7) {
      const auto first = text::parse_date(s + "-01");
      if (!first) throw bad();
      if (!end) return *first;
      const auto c = text::civil_from_days(*first);
      const int y = c.month == 12 ? c.year + 1 : c.year;
      const unsigned m = c.month == 12 ? 1 : c.month + 1;
      return text::days_from_civil(y, m, 1) - 1;
    }
    const auto d = text::parse_date(s);
    if (!d) throw bad();
    return *d;
  };
  SuppressionWindow w;
  w.first_day = day_of(arg.substr(0, colon), false);
  w.last_day = day_of(arg.substr(colon + 1, eq - colon - 1), true);
  const auto f = text::parse_number(arg.substr(eq + 1));
  if (!f) throw bad();
  w.factor = *f;
  return w;
}

inline std::string json_text(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// solve

struct SolveFlags {
  std::optional<std::string> config, prices, preset, mode, location, terminal, out_dir, start,
      dump_lp, regulation_file;
  std::optional<double> dt_hours, discount, s0;
  std::optional<int> steps;
  SchemaFlags schema;
};

inline int cmd_solve(const SolveFlags& f, std::ostream& out, std::ostream& err) {
  config::SolveSettings s;
  if (f.config) s = config::parse_solve(config::read_json_file(*f.config), config_dir(*f.config));
  if (f.prices) s.prices_path = config::resolve_path(*f.prices, fs::current_path(), "price file");
  if (s.prices_path.empty()) throw ConfigError("no price file given (--prices or config)");
  if (f.preset) s.device = preset(*f.preset);
  if (!s.device) throw ConfigError("no device given (--preset or config)");
  if (f.mode) s.mode = config::parse_enum<Mode>(*f.mode, parse_mode, "mode");
  if (f.terminal)
    s.terminal = config::parse_enum<TerminalPolicy>(*f.terminal, parse_terminal_policy,
                                                    "terminal policy");
  if (f.location) s.location = *f.location;
  if (f.dt_hours) s.dt_hours = *f.dt_hours;
  if (f.discount) s.discount_rate = *f.discount;
  if (f.out_dir) s.out_dir = *f.out_dir;
  if (f.start) s.start = *f.start;
  if (f.steps) s.steps = *f.steps;
  if (f.dump_lp) s.dump_lp = *f.dump_lp;
  if (f.regulation_file)
    s.regulation_file =
        config::resolve_path(*f.regulation_file, fs::current_path(), "regulation override file");
  f.schema.apply(s.schema);
  if (f.s0) s.device->initial_soc = *f.s0;

  const auto report = validate(*s.device);
  if (!report.valid()) throw Error("device", report.errors.front());
  std::vector<std::string> warnings = report.warnings;

  auto series = load_prices(s.prices_path, s.schema, {.allow_irregular = s.dt_hours > 0.0},
                            s.location);
  if (s.dt_hours > 0.0) series = resample(series, s.dt_hours);
  validate(series, true);
  std::size_t first = 0;
  if (!s.start.empty()) {
    const auto t = text::parse_timestamp(s.start);
    if (!t) throw ConfigError("cannot parse start \"" + s.start + "\"");
    const auto idx = series.index_of(*t);
    if (!idx) throw AlignmentError("start " + s.start + " is not a step of the price series");
    first = *idx;
  }
  if (s.steps < 0) throw ConfigError("steps must be non-negative");
  std::size_t count = series.size() - first;
  if (s.steps > 0) {
    if (static_cast<std::size_t>(s.steps) > count)
      throw SeriesError("price series has only " + std::to_string(count) + " steps from start");
    count = static_cast<std::size_t>(s.steps);
  }
  if (first != 0 || count != series.size()) series = slice(series, first, count);

  HorizonProblem hp;
  hp.device = *s.device;
  hp.prices = series;
  hp.dt_hours = series.dt_hours();
  hp.discount_rate = s.discount_rate;
  hp.mode = s.mode;
  hp.terminal = s.terminal;
  if (s.mode == Mode::joint) {
    CampaignConfig c;
    c.regulation = s.regulation;
    if (!s.regulation_file.empty())
      c.regulation_overrides = config::load_regulation_overrides(s.regulation_file);
    hp.reg = essrev::detail::regulation_for(c, hp.prices);
  }

  const std::set<std::string> inputs{s.prices_path};
  const fs::path out_dir(s.out_dir);
  if (!s.dump_lp.empty()) detail::write_file(s.dump_lp, lp::listing(build(hp)), inputs);
  for (const auto& w : warnings) err << "warning [device]: " << w << '\n';

  const auto res = optimize(hp);
  if (res.solution.status != lp::LpStatus::optimal) {
    write_file(out_dir / "revenue.json", json_text(revenue_summary(hp, res, warnings)), inputs);
    throw SolveFailure(std::string("horizon is ") + lp::to_string(res.solution.status));
  }
  std::ostringstream schedule;
  write_schedule(schedule, hp, *res.schedule, *res.revenue);
  write_file(out_dir / "schedule.csv", schedule.str(), inputs);
  write_file(out_dir / "revenue.json", json_text(revenue_summary(hp, res, warnings)), inputs);
  out << "r_arb: " << text::format_number(res.revenue->r_arb) << '\n'
      << "r_reg: " << text::format_number(res.revenue->r_reg) << '\n'
      << "total: " << text::format_number(res.revenue->total_discounted) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gen

struct GenFlags {
  int days = 365;
  std::string start = "2019-01-01";
  std::string location = "SYNTH";
  double dt_hours = 1.0;
  double base = 40.0, amplitude = 15.0, noise = 5.0, reg_ratio = 0.3, reg_noise = 1.0;
  std::vector<std::string> suppress;
  bool annual_cycle = false;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::string out_dir = ".";
};

inline int cmd_gen(const GenFlags& f, std::ostream& out, std::ostream& err) {
  SyntheticConfig c;
  const auto start = text::parse_date(f.start);
  if (!start) throw ConfigError("start must be YYYY-MM-DD");
  c.start_day = *start;
  c.days = f.days;
  c.location = f.location;
  c.dt_hours = f.dt_hours;
  c.base = f.base;
  c.amplitude = f.amplitude;
  c.noise = f.noise;
  c.reg_ratio = f.reg_ratio;
  c.reg_noise = f.reg_noise;
  c.annual_noise_cycle = f.annual_cycle;
  for (const auto& s : f.suppress) c.suppression.push_back(parse_suppression(s));
  std::vector<std::string> warnings;
  const auto series = gen_synthetic(c, f.seed, &warnings);
  for (const auto& w : warnings) err << "warning [data_ingest]: " << w << '\n';
  std::ostringstream os;
  write_prices(os, series);
  const fs::path path = f.out ? fs::path(*f.out) : fs::path(f.out_dir) / "prices.csv";
  write_file(path, os.str());
  out << "wrote " << path.string() << " (" << series.size() << " steps, fingerprint "
      << fingerprint(series) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// campaign and report

struct OutputFlags {
  std::optional<std::string> out_dir;
  bool plot = false;
  std::vector<int> yoy;
  std::string statistic = "mean";
};

inline Statistic parse_statistic(const std::string& s) {
  if (s == "mean") return Statistic::mean;
  if (s == "sum") return Statistic::sum;
  throw ConfigError("invalid statistic \"" + s + "\"");
}

// First two calendar years with solved days, if any.
inline std::optional<std::pair<int, int>> default_years(const CampaignResult& r) {
  std::set<int> years;
  for (const auto& rec : r.records)
    if (rec.solved()) years.insert(text::civil_from_days(rec.day).year);
  if (years.size() < 2) return std::nullopt;
  auto it = years.begin();
  const int a = *it++;
  return std::pair{a, *it};
}

inline void write_tables(const CampaignResult& result, const fs::path& dir,
                         std::optional<std::pair<int, int>> years, bool plot, Statistic stat,
                         const std::set<std::string>& inputs, std::ostream& out) {
  const auto monthly = aggregate(result, Grouping::monthly, stat);
  const auto annual = aggregate(result, Grouping::annual, stat);
  std::ostringstream m, a;
  write_aggregate(m, monthly);
  write_aggregate(a, annual);
  write_file(dir / "aggregate_monthly.csv", m.str(), inputs);
  write_file(dir / "aggregate_annual.csv", a.str(), inputs);
  if (!years) years = default_years(result);
  std::vector<YoyRow> yoy;
  if (years) {
    yoy = yoy_delta(result, years->first, years->second);
    std::ostringstream y;
    write_yoy(y, yoy, years->first, years->second);
    write_file(dir / "yoy.csv", y.str(), inputs);
    for (const auto& row : yoy)
      out << "yoy " << row.device << ' ' << row.location << ' ' << to_string(row.mode) << ": "
          << (row.percent ? text::format_number(*row.percent) + "%" : "undefined") << '\n';
  }
  if (plot) {
    write_file(dir / "revenue_by_year.svg", revenue_chart(aggregate(result, Grouping::annual,
                                                                    Statistic::mean)),
               inputs);
    if (years) write_file(dir / "yoy_change.svg", yoy_chart(yoy, years->first, years->second), inputs);
  }
}

inline std::optional<std::pair<int, int>> years_from(const std::vector<int>& v) {
  if (v.empty()) return std::nullopt;
  if (v.size() != 2) throw ConfigError("--yoy takes two years");
  return std::pair{v[0], v[1]};
}

struct CampaignFlags {
  std::optional<std::string> config, soc_policy, terminal;
  std::optional<unsigned> workers;
  std::optional<double> discount;
  std::vector<std::string> presets;
  OutputFlags output;
};

inline json manifest_json(const config::CampaignSettings& s, const PriceStore& store) {
  const json cfg = config::campaign_json(s);
  json fps = json::object();
  for (const auto& [loc, series] : store) fps[loc] = fingerprint(series);
  return {{"tool", "essrev"},
          {"version", ESSREV_VERSION},
          {"config", cfg},
          {"config_hash", text::hex64(text::fnv1a(cfg.dump()))},
          {"data_fingerprints", fps}};
}

inline int cmd_campaign(const CampaignFlags& f, std::ostream& out, std::ostream& err) {
  if (!f.config) throw ConfigError("campaign needs --config");
  const json doc = config::read_json_file(*f.config);
  const bool from_manifest = doc.is_object() && doc.contains("tool") && doc.contains("config");
  std::optional<json> fingerprints;
  config::CampaignSettings s;
  if (from_manifest) {
    config::ObjectReader r(doc, "manifest");
    if (r.require<std::string>("tool") != "essrev") throw ConfigError("not an essrev manifest");
    r.require<std::string>("version");
    const json cfg = r.raw("config");
    if (text::hex64(text::fnv1a(cfg.dump())) != r.require<std::string>("config_hash"))
      throw ConfigError("manifest config does not match its config_hash");
    fingerprints = r.raw("data_fingerprints");
    r.finish();
    s = config::parse_campaign(cfg, config_dir(*f.config));
  } else {
    s = config::parse_campaign(doc, config_dir(*f.config));
  }
  if (f.soc_policy)
    s.config.soc_policy =
        config::parse_enum<SocPolicy>(*f.soc_policy, parse_soc_policy, "soc policy");
  if (f.terminal)
    s.config.terminal = config::parse_enum<TerminalPolicy>(*f.terminal, parse_terminal_policy,
                                                           "terminal policy");
  if (f.workers) s.config.workers = *f.workers;
  if (f.discount) s.config.discount_rate = *f.discount;
  if (!f.presets.empty()) {
    s.config.devices.clear();
    for (const auto& p : f.presets) s.config.devices.push_back(preset(p));
  }
  if (f.output.out_dir) s.out_dir = *f.output.out_dir;
  if (f.output.plot) s.plot = true;
  if (auto y = years_from(f.output.yoy)) s.yoy = y;
  if (s.out_dir.empty()) s.out_dir = ".";
  validate(s.config);
  if (!s.regulation_file.empty())
    s.config.regulation_overrides = config::load_regulation_overrides(s.regulation_file);

  const auto store = config::load_campaign_prices(s);
  if (fingerprints) {
    for (const auto& [loc, series] : store) {
      if (!fingerprints->contains(loc) || (*fingerprints)[loc] != fingerprint(series))
        throw Error("data_ingest", "price data for " + loc + " differs from the manifest");
    }
  }
  for (const auto& d : s.config.devices)
    for (const auto& w : validate(d).warnings) err << "warning [device]: " << d.name << ": " << w << '\n';

  const auto result = run(s.config, store);
  std::set<std::string> inputs{fs::weakly_canonical(*f.config).string()};
  for (const auto& src : s.sources) inputs.insert(src.path);
  const fs::path dir(s.out_dir);
  std::ostringstream records;
  write_records(records, result);
  write_file(dir / "records.csv", records.str(), inputs);
  write_file(dir / "manifest.json", json_text(manifest_json(s, store)), inputs);
  for (const auto& msg : result.failures) err << "warning [campaign]: " << msg << '\n';
  out << result.records.size() << " records, " << result.failures.size() << " failed\n";
  write_tables(result, dir, s.yoy, s.plot, parse_statistic(f.output.statistic), inputs, out);
  return kExitOk;
}

struct ReportFlags {
  std::string records;
  OutputFlags output;
};

inline int cmd_report(const ReportFlags& f, std::ostream& out, std::ostream&) {
  std::ifstream in(f.records, std::ios::binary);
  if (!in) throw ConfigError("cannot open records file " + f.records);
  const auto result = read_records(in, f.records);
  const fs::path dir = f.output.out_dir ? fs::path(*f.output.out_dir) : fs::path(".");
  const std::set<std::string> inputs{fs::weakly_canonical(f.records).string()};
  write_tables(result, dir, years_from(f.output.yoy), f.output.plot,
               parse_statistic(f.output.statistic), inputs, out);
  return kExitOk;
}

inline void add_output_flags(CLI::App* app, OutputFlags& o) {
  app->add_option("--out-dir", o.out_dir, "Output directory");
  app->add_flag("--plot", o.plot, "Write SVG charts");
  app->add_option("--yoy", o.yoy, "Years to compare, e.g. --yoy 2019 2020")->expected(2);
  app->add_option("--statistic", o.statistic, "Aggregate statistic: mean or sum");
}

}  // namespace detail

/// Runs the tool on `args` (without the program name). Never throws.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy storage revenue analysis", "essrev"};
  app.set_version_flag("--version", ESSREV_VERSION);
  app.require_subcommand(1);

  detail::SolveFlags solve;
  auto* s = app.add_subcommand("solve", "Optimize one horizon");
  s->add_option("--config", solve.config, "JSON solve config");
  s->add_option("--prices", solve.prices, "Price CSV");
  s->add_option("--preset", solve.preset, "Device preset");
  s->add_option("--mode", solve.mode, "arbitrage or joint");
  s->add_option("--location", solve.location, "Location within the price file");
  s->add_option("--terminal", solve.terminal, "free or return-to-start");
  s->add_option("--dt-hours", solve.dt_hours, "Resample to this step");
  s->add_option("--discount", solve.discount, "Per-step discount rate");
  s->add_option("--s0", solve.s0, "Initial state of charge (MWh)");
  s->add_option("--start", solve.start, "First timestamp of the horizon");
  s->add_option("--steps", solve.steps, "Horizon length in steps");
  s->add_option("--regulation-file", solve.regulation_file, "Per-step regulation overrides");
  s->add_option("--out-dir", solve.out_dir, "Output directory");
  s->add_option("--dump-lp", solve.dump_lp, "Write the LP listing to this file");
  solve.schema.add_to(s);

  detail::GenFlags gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic price scenario");
  g->add_option("--days", gen.days, "Number of days");
  g->add_option("--start", gen.start, "First day (YYYY-MM-DD)");
  g->add_option("--location", gen.location, "Location label");
  g->add_option("--dt-hours", gen.dt_hours, "Step length");
  g->add_option("--base", gen.base, "Mean energy price");
  g->add_option("--amplitude", gen.amplitude, "Daily sinusoid amplitude");
  g->add_option("--noise", gen.noise, "Energy price noise std-dev");
  g->add_option("--reg-ratio", gen.reg_ratio, "Capacity price ratio to |lmp|");
  g->add_option("--reg-noise", gen.reg_noise, "Capacity price noise std-dev");
  g->add_option("--suppress", gen.suppress, "START:END=FACTOR price suppression window");
  g->add_flag("--annual-cycle", gen.annual_cycle, "Repeat the noise pattern every year");
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--out", gen.out, "Output CSV (default OUT_DIR/prices.csv)");
  g->add_option("--out-dir", gen.out_dir, "Output directory");

  detail::CampaignFlags camp;
  auto* c = app.add_subcommand("campaign", "Run a multi-day campaign");
  c->add_option("--config", camp.config, "Campaign config or manifest JSON");
  c->add_option("--soc-policy", camp.soc_policy, "carry-over or independent");
  c->add_option("--terminal", camp.terminal, "free or return-to-start");
  c->add_option("--workers", camp.workers, "Worker threads (0: all cores)");
  c->add_option("--discount", camp.discount, "Per-step discount rate");
  c->add_option("--preset", camp.presets, "Replace the device list with these presets");
  detail::add_output_flags(c, camp.output);

  detail::ReportFlags rep;
  auto* r = app.add_subcommand("report", "Rebuild tables and charts from a records CSV");
  r->add_option("--records", rep.records, "Records CSV")->required();
  detail::add_output_flags(r, rep.output);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) return detail::cmd_solve(solve, out, err);
    if (*g) return detail::cmd_gen(gen, out, err);
    if (*c) return detail::cmd_campaign(camp, out, err);
    return detail::cmd_report(rep, out, err);
  } catch (const Error& e) {
    err << "error [" << e.module() << "]: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error [cli]: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace essrev::cli
