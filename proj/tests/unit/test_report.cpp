/*
 * Copyright 2026 The pimolap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

#include "pimolap/errors.hpp"
#include "pimolap/report.hpp"
#include "pimolap/workload.hpp"

using namespace pimolap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pimolap_rep_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

planner::ModelTables flat_tables() {
  planner::ModelTables t;
  for (std::uint32_t s = 1; s <= 8; ++s) t.host[s] = {3000.0 * s, 60000.0, 1.0};
  for (std::uint32_t n = 1; n <= 4; ++n) {
    t.pim_alu[n] = {120.0 * n, 31000.0 * n, 1.0};
    t.pim_logic[n] = {1200.0 * n, 310000.0 * n, 1.0};
  }
  return t;
}

// Runs the whole suite on a small dataset in two modes.
std::vector<report::Row> suite_rows(std::vector<double>* ledger_energy = nullptr) {
  workload::WorkloadSpec spec;
  spec.scale_factor = 0.002;
  const auto rel = workload::generate(spec);
  device::PimDevice dev;
  const auto loaded = load(rel, place(rel.schema, LayoutMode::kOneXb), dev);
  const auto tables = flat_tables();
  std::vector<report::Row> rows;
  for (auto mode : {engine::ExecMode::kHybrid, engine::ExecMode::kLogicAggBaseline}) {
    for (const auto& t : workload::templates()) {
      const auto q = bind_query(workload::instantiate_query(t, rel).query, rel.schema);
      engine::RunOptions o;
      o.mode = mode;
      o.tables = &tables;
      const auto run = engine::run_query(loaded, dev, q, o);
      if (ledger_energy) {
        double e = 0;
        for (const auto& ev : dev.ledger().events()) e += ev.energy;
        ledger_energy->push_back(e);
      }
      rows.push_back(report::make_row(t.id, mode, LayoutMode::kOneXb, run));
    }
  }
  return rows;
}

report::RunConfig config() {
  report::RunConfig c;
  c.dataset = "data";
  c.models = "models";
  c.modes = {"hybrid", "logic-agg-baseline"};
  c.cost_overrides["t_host_read"] = 60;
  return c;
}

}  // namespace

TEST(GeoMean, PositiveEntriesOnly) {
  const std::vector<double> a{1, 4, 16};
  EXPECT_NEAR(report::geo_mean(a), 4.0, 1e-12);
  const std::vector<double> b{2, 0, 8, -3};
  EXPECT_NEAR(report::geo_mean(b), 4.0, 1e-12);
  const std::vector<double> c{0, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_EQ(report::geo_mean(c), 0.0);
  EXPECT_EQ(report::geo_mean({}), 0.0);
}

TEST(GeoMean, OneRowPerModeAndLayout) {
  std::vector<report::Row> rows(4);
  const char* modes[] = {"hybrid", "hybrid", "pim-only", "pim-only"};
  for (int i = 0; i < 4; ++i) {
    rows[i].query = "q" + std::to_string(i);
    rows[i].mode = modes[i];
    rows[i].layout = "one-xb";
    rows[i].latency_s = i % 2 ? 4.0 : 1.0;
    rows[i].energy_j = 9.0;
    rows[i].peak_power_w = {1.0 + i % 2 * 3, 2.0};
    rows[i].k = 7;
  }
  const auto g = report::geo_mean_rows(rows);
  ASSERT_EQ(g.size(), 2u);
  for (const auto& r : g) {
    EXPECT_EQ(r.query, "geomean");
    EXPECT_NEAR(r.latency_s, 2.0, 1e-12);
    EXPECT_NEAR(r.energy_j, 9.0, 1e-12);
    ASSERT_EQ(r.peak_power_w.size(), 2u);
    EXPECT_NEAR(r.peak_power_w[0], 2.0, 1e-12);
    EXPECT_EQ(r.k, 0u);
  }
}

TEST(RunConfig, JsonRoundTripAndValidation) {
  auto c = config();
  c.jobs = 8;
  c.output = "elsewhere";
  const auto back = report::RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.modes, c.modes);
  EXPECT_EQ(back.cost_overrides, c.cost_overrides);
  EXPECT_EQ(c.to_json().find("elsewhere"), std::string::npos);
  EXPECT_DOUBLE_EQ(c.cost_params().t_host_read, 60.0);
  c.modes = {"warp"};
  EXPECT_THROW(c.validate(), InvalidArgumentError);
  c = config();
  c.cost_overrides["t_read"] = -1;
  EXPECT_THROW(c.validate(), InvalidArgumentError);
  c = config();
  c.cost_overrides["bogus"] = 1;
  EXPECT_THROW(c.validate(), InvalidArgumentError);
  c = config();
  c.estimator = "guess";
  EXPECT_THROW(c.validate(), InvalidArgumentError);
}

TEST(Report, EnergyIsTheSumOfLedgerEvents) {
  std::vector<double> energy;
  const auto rows = suite_rows(&energy);
  ASSERT_EQ(rows.size(), energy.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].energy_j, energy[i], 1e-12 * energy[i]) << rows[i].query;
    EXPECT_GT(rows[i].energy_j, 0.0);
    EXPECT_GT(rows[i].latency_s, 0.0);
    EXPECT_EQ(rows[i].peak_power_w.size(), 8u);
  }
}

TEST(Report, FilesHaveEveryRowAndAreDeterministic) {
  const auto rows = suite_rows();
  ASSERT_EQ(rows.size(), 26u);
  const auto a = scratch("a");
  const auto b = scratch("b");
  const auto c = config();
  report::write_runs(a, c, rows);
  report::write_runs(b, c, suite_rows());
  EXPECT_EQ(slurp(a / "runs.csv"), slurp(b / "runs.csv"));
  EXPECT_EQ(slurp(a / "runs.json"), slurp(b / "runs.json"));

  const auto csv = lines(slurp(a / "runs.csv"));
  ASSERT_EQ(csv.size(), 2u + 26u + 2u);
  EXPECT_EQ(csv[0] + "\n", report::csv_header(8));
  EXPECT_EQ(csv[1] + "\n", report::csv_units(8));
  EXPECT_EQ(csv.back().rfind("geomean,", 0), 0u);

  const auto runs = report::read_runs(a / "runs.json");
  ASSERT_EQ(runs.rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(runs.rows[i].query, rows[i].query);
    EXPECT_EQ(runs.rows[i].k, rows[i].k);
    EXPECT_EQ(runs.rows[i].latency_s, rows[i].latency_s);
    EXPECT_EQ(runs.rows[i].energy_j, rows[i].energy_j);
    EXPECT_EQ(runs.rows[i].peak_power_w, rows[i].peak_power_w);
    EXPECT_EQ(runs.rows[i].endurance_10y, rows[i].endurance_10y);
  }
  EXPECT_EQ(runs.config.to_json(), c.to_json());

  report::write_tables(a / "t", runs);
  report::write_tables(b / "t", report::read_runs(b / "runs.json"));
  for (const char* f : {"latency.csv", "energy.csv", "power.csv", "endurance.csv", "summary.json"}) {
    ASSERT_TRUE(fs::exists(a / "t" / f)) << f;
    EXPECT_EQ(slurp(a / "t" / f), slurp(b / "t" / f)) << f;
  }
  const auto lat = lines(slurp(a / "t" / "latency.csv"));
  EXPECT_EQ(lat.size(), 2u + 13u + 1u);
  EXPECT_NE(slurp(a / "t" / "summary.json").find("baseline_over_hybrid"), std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Report, MissingRunsFileThrows) {
  EXPECT_THROW(report::read_runs("/nonexistent/runs.json"), Error);
}
