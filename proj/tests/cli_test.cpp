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

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "essrev/cli.hpp"
#include "xml_check.hpp"

namespace fs = std::filesystem;
using namespace essrev;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("essrev_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Two non-leap years of identical noise, year 2 scaled by `factor`.
  std::string two_year_prices(double factor) {
    const auto p = path("prices.csv");
    std::ostringstream sup;
    sup << "2019-01:2019-12=" << factor;
    const auto r = invoke({"gen", "--days", "730", "--start", "2018-01-01", "--seed", "11",
                        "--annual-cycle", "--suppress", sup.str(), "--location", "J", "--out", p});
    EXPECT_EQ(r.code, 0) << r.err;
    return p;
  }

  void write_campaign_config(const std::string& name, const std::string& prices) {
    json cfg = {{"start", "2018-01-01"},
                {"end", "2019-12-31"},
                {"devices", {"li-ion", "adv-lead-acid", "vanadium-redox", "lfp", "flywheel"}},
                {"locations", {{{"name", "J"}, {"prices", prices}}}},
                {"modes", {"arbitrage", "joint"}},
                {"workers", 2},
                {"out_dir", path("out")}};
    spit(path(name), cfg.dump(2));
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SolveHappyPath) {
  two_year_prices(1.0);
  const auto r = invoke({"solve", "--preset", "li-ion", "--mode", "arbitrage", "--prices",
                      path("prices.csv"), "--steps", "24", "--out-dir", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("o/schedule.csv")));
  EXPECT_TRUE(fs::exists(path("o/revenue.json")));
  EXPECT_NE(r.out.find("r_arb: "), std::string::npos);
  EXPECT_NE(r.out.find("r_reg: 0"), std::string::npos);
  EXPECT_NE(r.out.find("total: "), std::string::npos);
  const auto j = json::parse(slurp(path("o/revenue.json")));
  EXPECT_EQ(j["status"], "optimal");
  EXPECT_EQ(j["steps"], 24);
  EXPECT_TRUE(j["certificate"]["passed"].get<bool>());
}

TEST_F(CliTest, SolveFixtureTotalIsTen) {
  spit(path("day.csv"), "time,lmp\n2019-01-01T00:00:00,10\n2019-01-01T01:00:00,20\n");
  json cfg = {{"prices", "day.csv"},
              {"schema", {{"location", ""}}},
              {"device",
               {{"name", "unit"}, {"eta_s", 1.0}, {"eta_c", 1.0}, {"energy_capacity", 1.0},
                {"power_rating", 1.0}, {"initial_soc", 0.0}}},
              {"out_dir", path("o")}};
  spit(path("solve.json"), cfg.dump());
  const auto r = invoke({"solve", "--config", path("solve.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(path("o/revenue.json")));
  EXPECT_NEAR(j["total_discounted"].get<double>(), 10.0, 1e-8);
  std::ifstream in(path("o/schedule.csv"));
  const auto table = read_schedule(in);
  EXPECT_NEAR(table.schedule.charge[0], 1.0, 1e-9);
  EXPECT_NEAR(table.schedule.discharge[1], 1.0, 1e-9);
}

TEST_F(CliTest, SolveJointWithoutCapacityPrice) {
  spit(path("day.csv"), "time,lmp\n2019-01-01T00:00:00,10\n2019-01-01T01:00:00,20\n");
  const auto r = invoke({"solve", "--preset", "li-ion", "--mode", "joint", "--prices",
                      path("day.csv"), "--location-col", "", "--out-dir", path("o")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("regulation capacity price required"), std::string::npos) << r.err;
}

TEST_F(CliTest, SolveUsageErrors) {
  EXPECT_EQ(invoke({"solve", "--preset", "li-ion"}).code, 1);
  EXPECT_EQ(invoke({"solve", "--prices", path("missing.csv"), "--preset", "li-ion"}).code, 1);
  EXPECT_EQ(invoke({"frobnicate"}).code, 1);
  EXPECT_EQ(invoke({}).code, 1);
  spit(path("day.csv"), "time,lmp\n2019-01-01T00:00:00,10\n");
  const auto r = invoke({"solve", "--preset", "nickel", "--prices", path("day.csv"),
                      "--location-col", ""});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error [device]"), std::string::npos);
}

TEST_F(CliTest, SolveRejectsUnknownConfigKey) {
  spit(path("day.csv"), "time,lmp\n2019-01-01T00:00:00,10\n");
  spit(path("solve.json"), R"({"prices": "day.csv", "devcie": "li-ion"})");
  const auto r = invoke({"solve", "--config", path("solve.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown key \"devcie\""), std::string::npos) << r.err;
}

TEST_F(CliTest, SolveInfeasibleExitsTwo) {
  // Self-discharge outpaces the charge rate, so the start state cannot be restored.
  spit(path("day.csv"), "time,lmp\n2019-01-01T00:00:00,10\n2019-01-01T01:00:00,20\n");
  json cfg = {{"prices", "day.csv"},
              {"schema", {{"location", ""}}},
              {"device",
               {{"name", "leaky"}, {"eta_s", 0.5}, {"eta_c", 1.0}, {"energy_capacity", 1.0},
                {"power_rating", 0.1}, {"initial_soc", 1.0}}},
              {"terminal", "return-to-start"},
              {"out_dir", path("o")}};
  spit(path("solve.json"), cfg.dump());
  const auto r = invoke({"solve", "--config", path("solve.json")});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("infeasible"), std::string::npos) << r.err;
  EXPECT_EQ(json::parse(slurp(path("o/revenue.json")))["status"], "infeasible");
}

TEST_F(CliTest, DumpLp) {
  spit(path("day.csv"), "time,lmp\n2019-01-01T00:00:00,10\n2019-01-01T01:00:00,20\n");
  const auto r = invoke({"solve", "--preset", "lfp", "--prices", path("day.csv"), "--location-col",
                      "", "--dump-lp", path("model.lp"), "--out-dir", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lp = slurp(path("model.lp"));
  EXPECT_EQ(lp.rfind("MAXIMIZE", 0), 0u);
  EXPECT_NE(lp.find("END"), std::string::npos);
}

TEST_F(CliTest, GenDeterministic) {
  ASSERT_EQ(invoke({"gen", "--days", "365", "--seed", "7", "--out", path("a.csv")}).code, 0);
  ASSERT_EQ(invoke({"gen", "--days", "365", "--seed", "7", "--out", path("b.csv")}).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  ASSERT_EQ(invoke({"gen", "--days", "365", "--seed", "8", "--out", path("c.csv")}).code, 0);
  EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(CliTest, GenSuppressionMean) {
  const auto p = path("s.csv");
  ASSERT_EQ(invoke({"gen", "--days", "731", "--start", "2019-01-01", "--seed", "3", "--suppress",
                 "2020-03:2020-12=0.6", "--out", p})
                .code,
            0);
  const auto s = load_prices(p, CsvSchema::canonical());
  const auto lo = text::days_from_civil(2020, 3, 1) * text::kSecondsPerDay;
  const auto hi = text::days_from_civil(2021, 1, 1) * text::kSecondsPerDay;
  const auto base_lo = text::days_from_civil(2019, 3, 1) * text::kSecondsPerDay;
  const auto base_hi = text::days_from_civil(2020, 1, 1) * text::kSecondsPerDay;
  double sup = 0, base = 0;
  int ns = 0, nb = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto t = s.timestamps[i];
    if (t >= lo && t < hi) sup += s.lmp[i], ++ns;
    if (t >= base_lo && t < base_hi) base += s.lmp[i], ++nb;
  }
  EXPECT_NEAR((sup / ns) / (base / nb), 0.6, 0.01);
}

TEST_F(CliTest, GenInvalidRanges) {
  EXPECT_EQ(invoke({"gen", "--days", "0", "--out", path("x.csv")}).code, 1);
  EXPECT_EQ(invoke({"gen", "--noise", "-1", "--out", path("x.csv")}).code, 1);
  EXPECT_EQ(invoke({"gen", "--suppress", "2020-03=0.6", "--out", path("x.csv")}).code, 1);
  EXPECT_EQ(invoke({"gen", "--suppress", "2020-03:2020-04=1.5", "--out", path("x.csv")}).code, 1);
  EXPECT_FALSE(fs::exists(path("x.csv")));
}

TEST_F(CliTest, CampaignYoyAndPlots) {
  const auto prices = two_year_prices(0.6);
  write_campaign_config("campaign.json", prices);
  const auto before = slurp(prices);
  const auto r = invoke({"campaign", "--config", path("campaign.json"), "--plot"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(prices), before);

  std::ifstream yin(path("out/yoy.csv"));
  std::string header, line;
  std::getline(yin, header);
  int rows = 0;
  while (std::getline(yin, line)) {
    const auto f = text::split_fields(line);
    ASSERT_GE(f.size(), 6u);
    EXPECT_NEAR(*text::parse_number(f.back()), -40.0, 1e-6) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 10);

  for (const char* svg : {"out/revenue_by_year.svg", "out/yoy_change.svg"}) {
    const auto doc = slurp(path(svg));
    std::string why;
    EXPECT_TRUE(xml_check::well_formed(doc, &why)) << svg << ": " << why;
    EXPECT_EQ(xml_check::count(doc, "class=\"bar-group\""), 5) << svg;
    for (const char* dev : {"li-ion", "adv-lead-acid", "vanadium-redox", "lfp", "flywheel"})
      EXPECT_NE(doc.find(std::string("data-label=\"") + dev + "\""), std::string::npos);
  }
}

TEST_F(CliTest, CampaignOutputsRoundTrip) {
  const auto prices = two_year_prices(0.8);
  write_campaign_config("campaign.json", prices);
  ASSERT_EQ(invoke({"campaign", "--config", path("campaign.json"), "--preset", "lfp", "--plot"}).code,
            0);

  std::ifstream rin(path("out/records.csv"));
  const auto records = read_records(rin);
  EXPECT_EQ(records.records.size(), 730u * 2);
  std::ostringstream again;
  write_records(again, records);
  EXPECT_EQ(again.str(), slurp(path("out/records.csv")));

  // Tables re-derive from the re-parsed records.
  const auto report = invoke({"report", "--records", path("out/records.csv"), "--out-dir",
                           path("rep"), "--plot"});
  ASSERT_EQ(report.code, 0) << report.err;
  for (const char* f : {"aggregate_monthly.csv", "aggregate_annual.csv", "yoy.csv",
                        "revenue_by_year.svg", "yoy_change.svg"})
    EXPECT_EQ(slurp(path(std::string("rep/") + f)), slurp(path(std::string("out/") + f))) << f;

  const auto manifest = json::parse(slurp(path("out/manifest.json")));
  EXPECT_EQ(manifest["tool"], "essrev");
  EXPECT_EQ(manifest["config"]["devices"].size(), 1u);
  EXPECT_EQ(manifest["data_fingerprints"]["J"],
            fingerprint(load_prices(prices, CsvSchema::canonical())));
}

TEST_F(CliTest, ManifestRerunIsByteIdentical) {
  const auto prices = two_year_prices(0.9);
  write_campaign_config("campaign.json", prices);
  ASSERT_EQ(invoke({"campaign", "--config", path("campaign.json"), "--preset", "flywheel"}).code, 0);
  fs::copy_file(path("out/manifest.json"), path("manifest.json"));
  const auto r = invoke({"campaign", "--config", path("manifest.json"), "--out-dir", path("rerun"),
                      "--workers", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("rerun/records.csv")), slurp(path("out/records.csv")));

  // Edited data no longer matches the fingerprint.
  auto text = slurp(prices);
  text.replace(text.find(",J,") + 3, 1, "9");
  spit(prices, text);
  EXPECT_EQ(invoke({"campaign", "--config", path("manifest.json"), "--out-dir", path("x")}).code, 1);
}

TEST_F(CliTest, CampaignErrors) {
  const auto prices = two_year_prices(1.0);
  json cfg = {{"start", "2018-01-01"}, {"end", "2018-01-10"}, {"devices", json::array()},
              {"locations", {{{"name", "J"}, {"prices", prices}}}}, {"modes", {"arbitrage"}}};
  spit(path("empty.json"), cfg.dump());
  const auto r = invoke({"campaign", "--config", path("empty.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error [campaign]"), std::string::npos) << r.err;

  cfg["devices"] = {"li-ion"};
  cfg["end"] = "2020-01-05";
  cfg["out_dir"] = path("gap");
  spit(path("gap.json"), cfg.dump());
  const auto g = invoke({"campaign", "--config", path("gap.json")});
  EXPECT_EQ(g.code, 2);
  EXPECT_NE(g.err.find("missing 2020-01-01..2020-01-05"), std::string::npos) << g.err;

  cfg["locations"][0]["prices"] = "nowhere.csv";
  spit(path("missing.json"), cfg.dump());
  EXPECT_EQ(invoke({"campaign", "--config", path("missing.json")}).code, 1);
}
