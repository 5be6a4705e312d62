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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pimolap/engine.hpp"

namespace pimolap::report {

/// Everything that determines a benchmark run. Embedded verbatim in the
/// reports it produces.
struct RunConfig {
  std::string dataset;
  std::string models;  // directory holding models_<layout>.json
  std::vector<std::string> layouts{"one-xb"};
  std::vector<std::string> modes{"hybrid"};
  std::vector<std::string> queries;  // empty: every query of the dataset
  std::map<std::string, double> cost_overrides;
  std::string estimator = "sample";
  std::uint32_t threads = 4;
  std::uint32_t jobs = 1;
  std::uint64_t seed = 42;
  std::string output = "out";

  void validate() const;
  /// jobs and output do not change results and are left out.
  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  CostParams cost_params() const;
};

struct Row {
  std::string query;
  std::string mode;
  std::string layout;
  std::uint64_t k = 0;
  std::uint64_t k_max = 1;
  double selectivity = 0.0;
  double latency_s = 0.0;
  double energy_j = 0.0;
  std::vector<double> peak_power_w;  // per chip
  std::uint64_t max_row_writes = 0;
  double endurance_10y = 0.0;
  std::uint64_t groups = 0;

  double peak_power_max() const;
};

Row make_row(const std::string& query, engine::ExecMode mode, LayoutMode layout, const engine::QueryRun& run);

/// exp(mean(log x)) over the strictly positive entries; 0 when there are none.
double geo_mean(std::span<const double> values);

/// One geo-mean row per (mode, layout), query id "geomean". peak_power_w is
/// averaged chip by chip, k and k_max are left at 0.
std::vector<Row> geo_mean_rows(const std::vector<Row>& rows);

std::string csv_header(std::size_t chips);
std::string csv_units(std::size_t chips);
std::string csv_row(const Row& row);

/// runs.csv (header, units, rows, geo-mean rows) and runs.json (config,
/// rows, geo-mean rows).
void write_runs(const std::filesystem::path& dir, const RunConfig& config, const std::vector<Row>& rows);

struct Runs {
  RunConfig config;
  std::vector<Row> rows;
};

Runs read_runs(const std::filesystem::path& runs_json);

/// latency.csv, energy.csv, power.csv and endurance.csv (query x
/// mode/layout, with a geo-mean row) plus summary.json.
void write_tables(const std::filesystem::path& dir, const Runs& runs);

}  // namespace pimolap::report
