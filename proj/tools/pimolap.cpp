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

// pimolap: generate a dataset, calibrate latency models, run the query
// suite and tabulate the results.
//
//   pimolap generate --sf 0.01
//   pimolap calibrate --layout one-xb --layout two-xb
//   pimolap run --mode hybrid --mode logic-agg-baseline
//   pimolap report
//
// Every subcommand reads its defaults from the [section] of the same name
// in --config (INI). Flags override the file. Outputs go below --out-dir,
// which defaults to $PIMOLAP_OUT or ./pimolap-out.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pimolap/calibration.hpp"
#include "pimolap/engine.hpp"
#include "pimolap/errors.hpp"
#include "pimolap/layout.hpp"
#include "pimolap/planner.hpp"
#include "pimolap/query.hpp"
#include "pimolap/relation_io.hpp"
#include "pimolap/report.hpp"
#include "pimolap/workload.hpp"

namespace fs = std::filesystem;
using namespace pimolap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

struct Common {
  std::string out_dir = "pimolap-out";
  unsigned jobs = 1;
  std::vector<std::string> cost;
  bool quiet = false;
};

std::map<std::string, double> parse_overrides(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgumentError("cost override '" + item + "' is not name=value");
    const auto name = item.substr(0, eq);
    try {
      std::size_t used = 0;
      const double v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
      out[name] = v;
    } catch (const std::logic_error&) {
      throw InvalidArgumentError("cost override '" + item + "' has a malformed value");
    }
  }
  return out;
}

CostParams cost_params(const std::vector<std::string>& items) {
  CostParams p;
  for (const auto& [k, v] : parse_overrides(items)) p.set(k, v);
  p.validate();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw InvalidArgumentError("cannot open " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned t = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < t; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// generate

struct GenerateOpts {
  double sf = 0.01;
  std::uint64_t base_rows = 6'000'000;
  double skew = 1.0;
  std::optional<double> customer_skew, supplier_skew, part_skew;
  std::uint64_t seed = 42;
  std::string dataset;
};

int cmd_generate(const Common& c, const GenerateOpts& o) {
  workload::WorkloadSpec spec;
  spec.scale_factor = o.sf;
  spec.base_rows = o.base_rows;
  spec.customer_skew = o.customer_skew.value_or(o.skew);
  spec.supplier_skew = o.supplier_skew.value_or(o.skew);
  spec.part_skew = o.part_skew.value_or(o.skew);
  spec.seed = o.seed;
  const fs::path dir = o.dataset.empty() ? fs::path(c.out_dir) / "dataset" : fs::path(o.dataset);
  const auto inst = workload::generate_to(spec, dir);
  if (!c.quiet) {
    std::printf("%llu records -> %s\n", static_cast<unsigned long long>(spec.fact_rows()), dir.string().c_str());
    for (const auto& i : inst) {
      std::printf("  %-5s target %.2e  achieved %.2e  (%llu rows)%s\n", i.query.name.c_str(),
                  i.query.target_selectivity.value_or(0.0), i.achieved_selectivity,
                  static_cast<unsigned long long>(i.selected), i.degenerate ? "  degenerate" : "");
    }
  }
  return kExitOk;
}

// calibrate

struct CalibrateOpts {
  std::vector<std::string> layouts{"one-xb", "two-xb"};
  std::vector<std::uint64_t> pages{1, 2, 4, 8, 16};
  std::vector<double> r{1e-4, 1e-3, 1e-2, 0.1, 0.5};
  std::uint64_t seed = 7;
  std::string models;
};

int cmd_calibrate(const Common& c, const CalibrateOpts& o) {
  const auto params = cost_params(c.cost);
  calibration::Grid grid;
  grid.pages = o.pages;
  grid.r = o.r;
  grid.seed = o.seed;
  grid.validate();
  std::vector<LayoutMode> layouts;
  for (const auto& l : o.layouts) layouts.push_back(layout_mode_from_string(l));
  const fs::path dir = o.models.empty() ? fs::path(c.out_dir) / "models" : fs::path(o.models);
  fs::create_directories(dir);
  std::vector<planner::ModelTables> tables(layouts.size());
  std::vector<calibration::Measurements> ms(layouts.size());
  parallel_for(layouts.size(), c.jobs, [&](std::size_t i) {
    ms[i] = calibration::measure(layouts[i], grid, {}, params);
    tables[i] = calibration::fit(ms[i], layouts[i]);
  });
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    const std::string name = to_string(layouts[i]);
    tables[i].save(dir / ("models_" + name + ".json"));
    std::ofstream csv(dir / ("samples_" + name + ".csv"), std::ios::trunc);
    csv << "kind,key,pages,r,latency_ns\n";
    for (const auto& s : ms[i].host) csv << "host," << s.reads_per_record << ',' << s.pages << ',' << s.r << ',' << s.latency_ns << '\n';
    for (const auto& s : ms[i].pim_alu) csv << "pim-alu," << s.granules << ',' << s.pages << ",," << s.latency_ns << '\n';
    for (const auto& s : ms[i].pim_logic) csv << "pim-logic," << s.granules << ',' << s.pages << ",," << s.latency_ns << '\n';
    if (!c.quiet) {
      std::printf("%s -> %s\n", name.c_str(), (dir / ("models_" + name + ".json")).string().c_str());
      for (const auto& [s, f] : tables[i].host) std::printf("  host s=%u  a=%.4g  b=%.4g  R2=%.5f\n", s, f.a, f.b, f.r2);
      for (const auto& [n, f] : tables[i].pim_alu) {
        std::printf("  pim  n=%u  slope=%.4g  intercept=%.4g  R2=%.6f\n", n, f.slope, f.intercept, f.r2);
      }
    }
  }
  return kExitOk;
}

// run

struct RunOpts {
  std::string config_dump;
  report::RunConfig cfg;
  std::string runs;
};

std::vector<std::pair<std::string, Query>> load_queries(const fs::path& dataset, const std::vector<std::string>& only) {
  const auto qdir = dataset / "queries";
  if (!fs::is_directory(qdir)) throw InvalidArgumentError("no query directory at " + qdir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(qdir)) {
    if (e.path().extension() == ".qry") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, Query>> out;
  for (const auto& f : files) {
    auto q = parse_query(slurp(f));
    const auto id = q.name.empty() ? f.stem().string() : q.name;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    out.emplace_back(id, std::move(q));
  }
  for (const auto& want : only) {
    if (std::none_of(out.begin(), out.end(), [&](const auto& p) { return p.first == want; })) {
      throw InvalidArgumentError("query '" + want + "' not found in " + qdir.string());
    }
  }
  if (out.empty()) throw InvalidArgumentError("no queries selected");
  return out;
}

int cmd_run(const Common& c, RunOpts& o) {
  auto& cfg = o.cfg;
  cfg.cost_overrides = parse_overrides(c.cost);
  cfg.jobs = c.jobs;
  cfg.output = c.out_dir;
  if (cfg.dataset.empty()) cfg.dataset = (fs::path(c.out_dir) / "dataset").string();
  if (cfg.models.empty()) cfg.models = (fs::path(c.out_dir) / "models").string();
  cfg.validate();
  const auto params = cfg.cost_params();

  const fs::path dataset(cfg.dataset);
  const auto wl = dataset / "workload.json";
  if (fs::exists(wl)) cfg.seed = nlohmann::json::parse(slurp(wl)).value("seed", cfg.seed);
  const auto relation = load_relation(dataset / "relation");
  const auto queries = load_queries(dataset, cfg.queries);

  std::vector<BoundQuery> bound;
  for (const auto& [id, q] : queries) bound.push_back(bind_query(q, relation.schema));

  struct Group {
    LayoutMode layout;
    engine::ExecMode mode;
  };
  std::vector<Group> groups;
  for (const auto& l : cfg.layouts) {
    for (const auto& m : cfg.modes) groups.push_back({layout_mode_from_string(l), engine::exec_mode_from_string(m)});
  }
  std::map<LayoutMode, std::optional<planner::ModelTables>> tables;
  for (const auto& g : groups) {
    if (tables.count(g.layout)) continue;
    const auto path = fs::path(cfg.models) / ("models_" + std::string(to_string(g.layout)) + ".json");
    tables[g.layout] = fs::exists(path) ? std::optional(planner::ModelTables::load(path)) : std::nullopt;
  }
  for (const auto& g : groups) {
    const bool needs = g.mode == engine::ExecMode::kHybrid || g.mode == engine::ExecMode::kLogicAggBaseline;
    if (needs && !tables[g.layout]) {
      throw ModelError(std::string(engine::to_string(g.mode)) + " mode needs " + cfg.models + "/models_" +
                       to_string(g.layout) + ".json; run 'pimolap calibrate' first");
    }
  }

  std::vector<std::vector<report::Row>> results(groups.size());
  std::mutex print;
  parallel_for(groups.size(), c.jobs, [&](std::size_t gi) {
    const auto& g = groups[gi];
    device::PimDevice dev({}, params);
    const auto rel = load(relation, place(relation.schema, g.layout), dev);
    engine::RunOptions opts;
    opts.mode = g.mode;
    opts.threads = cfg.threads;
    opts.estimator = cfg.estimator == "exact" ? engine::Estimator::kExact : engine::Estimator::kSample;
    opts.tables = tables[g.layout] ? &*tables[g.layout] : nullptr;
    for (std::size_t qi = 0; qi < bound.size(); ++qi) {
      const auto run = engine::run_query(rel, dev, bound[qi], opts);
      results[gi].push_back(report::make_row(queries[qi].first, g.mode, g.layout, run));
      if (!c.quiet) {
        std::lock_guard lock(print);
        std::printf("%-5s %-18s %-6s k=%llu/%llu  sel=%.2e  %.3e s  %.3e J\n", queries[qi].first.c_str(),
                    engine::to_string(g.mode), to_string(g.layout), static_cast<unsigned long long>(run.k),
                    static_cast<unsigned long long>(run.k_max), run.selectivity(), run.report.total_latency,
                    run.report.pim_energy);
      }
    }
  });
  std::vector<report::Row> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  const fs::path dir = o.runs.empty() ? fs::path(c.out_dir) / "runs" : fs::path(o.runs);
  report::write_runs(dir, cfg, rows);
  if (!c.quiet) std::printf("%zu rows -> %s\n", rows.size(), (dir / "runs.json").string().c_str());
  return kExitOk;
}

// report

struct ReportOpts {
  std::string runs;
  std::string report;
};

int cmd_report(const Common& c, const ReportOpts& o) {
  fs::path runs = o.runs.empty() ? fs::path(c.out_dir) / "runs" : fs::path(o.runs);
  if (fs::is_directory(runs)) runs /= "runs.json";
  const fs::path dir = o.report.empty() ? fs::path(c.out_dir) / "report" : fs::path(o.report);
  report::write_tables(dir, report::read_runs(runs));
  if (!c.quiet) std::printf("tables -> %s\n", dir.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bulk-bitwise PIM OLAP simulator: dataset generation, model calibration, query runs, reports"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "INI file; [generate], [calibrate], [run] and [report] sections");

  Common common;
  if (const char* env = std::getenv("PIMOLAP_OUT"); env && *env) common.out_dir = env;
  app.add_option("--out-dir", common.out_dir, "Base output directory (env PIMOLAP_OUT)")->capture_default_str();
  app.add_option("-j,--jobs", common.jobs, "Worker threads for independent runs")
      ->capture_default_str()
      ->check(CLI::Range(1u, 256u));
  app.add_option("--cost", common.cost, "Cost parameter override name=value (repeatable), e.g. t_host_read=60");
  app.add_flag("-q,--quiet", common.quiet, "Only report errors");

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Generate the pre-joined SSB-like relation and the 13 queries");
  g->add_option("--sf", gen.sf, "Scale factor")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--base-rows", gen.base_rows, "Fact rows at scale factor 1")->capture_default_str();
  g->add_option("--skew", gen.skew, "Zipf exponent for every dimension family")->capture_default_str();
  g->add_option("--customer-skew", gen.customer_skew, "Zipf exponent for customer attributes");
  g->add_option("--supplier-skew", gen.supplier_skew, "Zipf exponent for supplier attributes");
  g->add_option("--part-skew", gen.part_skew, "Zipf exponent for part attributes");
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--dataset", gen.dataset, "Dataset directory (default <out-dir>/dataset)");

  CalibrateOpts cal;
  auto* k = app.add_subcommand("calibrate", "Measure host-gb and pim-gb latencies and fit the planner models");
  k->add_option("--layout", cal.layouts, "Layouts to calibrate (one-xb, two-xb)")->capture_default_str();
  k->add_option("--pages", cal.pages, "Relation sizes in pages")->capture_default_str();
  k->add_option("--r", cal.r, "Selectivities")->capture_default_str();
  k->add_option("--seed", cal.seed, "Synthetic data seed")->capture_default_str();
  k->add_option("--models", cal.models, "Model directory (default <out-dir>/models)");

  RunOpts run;
  auto* r = app.add_subcommand("run", "Run queries across execution modes and layouts");
  r->add_option("--dataset", run.cfg.dataset, "Dataset directory (default <out-dir>/dataset)");
  r->add_option("--models", run.cfg.models, "Model directory (default <out-dir>/models)");
  r->add_option("--layout", run.cfg.layouts, "one-xb, two-xb")->capture_default_str();
  r->add_option("--mode", run.cfg.modes, "hybrid, pim-only, host-only, logic-agg-baseline")->capture_default_str();
  r->add_option("--query", run.cfg.queries, "Query ids (default all)");
  r->add_option("--estimator", run.cfg.estimator, "Subgroup estimates: sample or exact")->capture_default_str();
  r->add_option("--threads", run.cfg.threads, "Simulated host threads")->capture_default_str();
  r->add_option("--runs", run.runs, "Output directory (default <out-dir>/runs)");

  ReportOpts rep;
  auto* p = app.add_subcommand("report", "Tabulate latency, energy, peak power and endurance from runs.json");
  p->add_option("--runs", rep.runs, "runs.json or its directory (default <out-dir>/runs)");
  p->add_option("--report", rep.report, "Output directory (default <out-dir>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*g) return cmd_generate(common, gen);
    if (*k) return cmd_calibrate(common, cal);
    if (*r) return cmd_run(common, run);
    if (*p) return cmd_report(common, rep);
  } catch (const PageBusyError& e) {
    std::fprintf(stderr, "pimolap: internal error: %s\n", e.what());
    return kExitInternal;
  } catch (const Error& e) {
    std::fprintf(stderr, "pimolap: %s\n", e.what());
    return kExitUser;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pimolap: internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
