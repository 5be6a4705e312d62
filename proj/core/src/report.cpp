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

#include "pimolap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "pimolap/errors.hpp"

namespace pimolap::report {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw Error("cannot write " + path.string());
}

json row_json(const Row& r) {
  return {{"query", r.query},
          {"mode", r.mode},
          {"layout", r.layout},
          {"k", r.k},
          {"k_max", r.k_max},
          {"selectivity", r.selectivity},
          {"total_latency", r.latency_s},
          {"pim_energy", r.energy_j},
          {"peak_power", r.peak_power_w},
          {"max_row_writes", r.max_row_writes},
          {"required_endurance_10y", r.endurance_10y},
          {"groups", r.groups}};
}

Row row_from_json(const json& j) {
  Row r;
  r.query = j.at("query").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.layout = j.at("layout").get<std::string>();
  r.k = j.at("k").get<std::uint64_t>();
  r.k_max = j.at("k_max").get<std::uint64_t>();
  r.selectivity = j.at("selectivity").get<double>();
  r.latency_s = j.at("total_latency").get<double>();
  r.energy_j = j.at("pim_energy").get<double>();
  r.peak_power_w = j.at("peak_power").get<std::vector<double>>();
  r.max_row_writes = j.at("max_row_writes").get<std::uint64_t>();
  r.endurance_10y = j.at("required_endurance_10y").get<double>();
  r.groups = j.value("groups", std::uint64_t{0});
  return r;
}

json config_json(const RunConfig& c) {
  json overrides = json::object();
  for (const auto& [k, v] : c.cost_overrides) overrides[k] = v;
  return {{"dataset", c.dataset}, {"models", c.models},       {"layouts", c.layouts},
          {"modes", c.modes},     {"queries", c.queries},     {"cost_overrides", overrides},
          {"estimator", c.estimator}, {"threads", c.threads}, {"seed", c.seed}};
}

}  // namespace

void RunConfig::validate() const {
  if (layouts.empty()) throw InvalidArgumentError("no layout selected");
  if (modes.empty()) throw InvalidArgumentError("no execution mode selected");
  for (const auto& l : layouts) layout_mode_from_string(l);
  for (const auto& m : modes) engine::exec_mode_from_string(m);
  if (estimator != "sample" && estimator != "exact") {
    throw InvalidArgumentError("estimator must be 'sample' or 'exact', got '" + estimator + "'");
  }
  if (threads == 0) throw InvalidArgumentError("threads must be positive");
  if (jobs == 0) throw InvalidArgumentError("jobs must be positive");
  cost_params();
}

std::string RunConfig::to_json() const { return config_json(*this).dump(1); }

RunConfig RunConfig::from_json(const std::string& text) {
  RunConfig c;
  try {
    const auto j = json::parse(text);
    c.dataset = j.value("dataset", c.dataset);
    c.models = j.value("models", c.models);
    c.layouts = j.value("layouts", c.layouts);
    c.modes = j.value("modes", c.modes);
    c.queries = j.value("queries", c.queries);
    if (j.contains("cost_overrides")) {
      for (const auto& [k, v] : j.at("cost_overrides").items()) c.cost_overrides[k] = v.get<double>();
    }
    c.estimator = j.value("estimator", c.estimator);
    c.threads = j.value("threads", c.threads);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed run config: ") + e.what());
  }
  return c;
}

CostParams RunConfig::cost_params() const {
  CostParams p;
  for (const auto& [k, v] : cost_overrides) p.set(k, v);
  p.validate();
  return p;
}

double Row::peak_power_max() const {
  return peak_power_w.empty() ? 0.0 : *std::max_element(peak_power_w.begin(), peak_power_w.end());
}

Row make_row(const std::string& query, engine::ExecMode mode, LayoutMode layout, const engine::QueryRun& run) {
  Row r;
  r.query = query;
  r.mode = engine::to_string(mode);
  r.layout = to_string(layout);
  r.k = run.k;
  r.k_max = run.k_max;
  r.selectivity = run.selectivity();
  r.latency_s = run.report.total_latency;
  r.energy_j = run.report.pim_energy;
  r.peak_power_w = run.report.peak_power;
  r.max_row_writes = run.report.max_row_writes;
  r.endurance_10y = run.report.required_endurance_10y;
  r.groups = run.groups.size();
  return r;
}

double geo_mean(std::span<const double> values) {
  double acc = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (v > 0 && std::isfinite(v)) {
      acc += std::log(v);
      ++n;
    }
  }
  return n ? std::exp(acc / static_cast<double>(n)) : 0.0;
}

std::vector<Row> geo_mean_rows(const std::vector<Row>& rows) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : rows) {
    std::pair<std::string, std::string> key{r.mode, r.layout};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<Row> out;
  for (const auto& [mode, layout] : keys) {
    std::vector<double> sel, lat, en, wr, endu;
    std::vector<std::vector<double>> chip;
    for (const auto& r : rows) {
      if (r.mode != mode || r.layout != layout) continue;
      sel.push_back(r.selectivity);
      lat.push_back(r.latency_s);
      en.push_back(r.energy_j);
      wr.push_back(static_cast<double>(r.max_row_writes));
      endu.push_back(r.endurance_10y);
      if (chip.size() < r.peak_power_w.size()) chip.resize(r.peak_power_w.size());
      for (std::size_t c = 0; c < r.peak_power_w.size(); ++c) chip[c].push_back(r.peak_power_w[c]);
    }
    Row g;
    g.query = "geomean";
    g.mode = mode;
    g.layout = layout;
    g.k = 0;
    g.k_max = 0;
    g.selectivity = geo_mean(sel);
    g.latency_s = geo_mean(lat);
    g.energy_j = geo_mean(en);
    g.max_row_writes = static_cast<std::uint64_t>(std::llround(geo_mean(wr)));
    g.endurance_10y = geo_mean(endu);
    for (const auto& c : chip) g.peak_power_w.push_back(geo_mean(c));
    out.push_back(std::move(g));
  }
  return out;
}

std::string csv_header(std::size_t chips) {
  std::string h = "query,mode,layout,k,k_max,selectivity,total_latency,pim_energy,peak_power";
  for (std::size_t c = 0; c < chips; ++c) h += ",peak_power_chip" + std::to_string(c);
  return h + ",max_row_writes,required_endurance_10y\n";
}

std::string csv_units(std::size_t chips) {
  std::string u = "-,-,-,subgroups,subgroups,fraction,s,J,W";
  for (std::size_t c = 0; c < chips; ++c) u += ",W";
  return u + ",writes,writes/cell\n";
}

std::string csv_row(const Row& r) {
  std::ostringstream o;
  o << r.query << ',' << r.mode << ',' << r.layout << ',' << r.k << ',' << r.k_max << ',' << num(r.selectivity)
    << ',' << num(r.latency_s) << ',' << num(r.energy_j) << ',' << num(r.peak_power_max());
  for (double p : r.peak_power_w) o << ',' << num(p);
  o << ',' << r.max_row_writes << ',' << num(r.endurance_10y) << '\n';
  return o.str();
}

void write_runs(const std::filesystem::path& dir, const RunConfig& config, const std::vector<Row>& rows) {
  std::filesystem::create_directories(dir);
  const auto geo = geo_mean_rows(rows);
  std::size_t chips = 0;
  for (const auto& r : rows) chips = std::max(chips, r.peak_power_w.size());
  std::string csv = csv_header(chips) + csv_units(chips);
  for (const auto& r : rows) csv += csv_row(r);
  for (const auto& r : geo) csv += csv_row(r);
  write_file(dir / "runs.csv", csv);

  json j;
  j["config"] = config_json(config);
  j["rows"] = json::array();
  for (const auto& r : rows) j["rows"].push_back(row_json(r));
  j["geomean"] = json::array();
  for (const auto& r : geo) j["geomean"].push_back(row_json(r));
  write_file(dir / "runs.json", j.dump(1) + "\n");
}

Runs read_runs(const std::filesystem::path& runs_json) {
  std::ifstream f(runs_json, std::ios::binary);
  if (!f) throw InvalidArgumentError("cannot open " + runs_json.string());
  std::stringstream ss;
  ss << f.rdbuf();
  Runs runs;
  try {
    const auto j = json::parse(ss.str());
    runs.config = RunConfig::from_json(j.at("config").dump());
    for (const auto& r : j.at("rows")) runs.rows.push_back(row_from_json(r));
  } catch (const json::exception& e) {
    throw FormatError(runs_json.string() + ": " + e.what());
  }
  return runs;
}

void write_tables(const std::filesystem::path& dir, const Runs& runs) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> queries;
  std::vector<std::string> configs;
  std::map<std::pair<std::string, std::string>, const Row*> cell;
  for (const auto& r : runs.rows) {
    if (std::find(queries.begin(), queries.end(), r.query) == queries.end()) queries.push_back(r.query);
    const auto c = r.mode + "/" + r.layout;
    if (std::find(configs.begin(), configs.end(), c) == configs.end()) configs.push_back(c);
    cell[{r.query, c}] = &r;
  }

  struct Metric {
    const char* file;
    const char* unit;
    double (*get)(const Row&);
  };
  const Metric metrics[] = {
      {"latency.csv", "s", [](const Row& r) { return r.latency_s; }},
      {"energy.csv", "J", [](const Row& r) { return r.energy_j; }},
      {"power.csv", "W", [](const Row& r) { return r.peak_power_max(); }},
      {"endurance.csv", "writes/cell", [](const Row& r) { return r.endurance_10y; }},
  };
  json summary;
  summary["config"] = config_json(runs.config);
  for (const auto& m : metrics) {
    std::string csv = "query";
    for (const auto& c : configs) csv += "," + c;
    csv += "\n-";
    for (std::size_t i = 0; i < configs.size(); ++i) csv += std::string(",") + m.unit;
    csv += "\n";
    std::vector<std::vector<double>> columns(configs.size());
    for (const auto& q : queries) {
      csv += q;
      for (std::size_t i = 0; i < configs.size(); ++i) {
        csv += ",";
        auto it = cell.find({q, configs[i]});
        if (it == cell.end()) continue;
        const double v = m.get(*it->second);
        columns[i].push_back(v);
        csv += num(v);
      }
      csv += "\n";
    }
    csv += "geomean";
    std::string name = m.file;
    name = name.substr(0, name.find('.'));
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const double g = geo_mean(columns[i]);
      csv += "," + num(g);
      summary["geomean"][configs[i]][name] = g;
    }
    csv += "\n";
    write_file(dir / m.file, csv);
  }

  // baseline over hybrid, per layout
  std::set<std::string> layouts;
  for (const auto& r : runs.rows) layouts.insert(r.layout);
  for (const auto& l : layouts) {
    const auto h = "hybrid/" + l;
    const auto b = std::string(engine::to_string(engine::ExecMode::kLogicAggBaseline)) + "/" + l;
    if (!summary.contains("geomean") || !summary["geomean"].contains(h) || !summary["geomean"].contains(b)) continue;
    for (const char* name : {"latency", "energy", "endurance"}) {
      const double hv = summary["geomean"][h][name].get<double>();
      const double bv = summary["geomean"][b][name].get<double>();
      summary["baseline_over_hybrid"][l][name] = hv > 0 ? bv / hv : 0.0;
    }
  }
  write_file(dir / "summary.json", summary.dump(1) + "\n");
}

}  // namespace pimolap::report
