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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracle.hpp"
#include "pimolap/calibration.hpp"
#include "pimolap/engine.hpp"
#include "pimolap/errors.hpp"
#include "pimolap/layout.hpp"
#include "pimolap/ledger.hpp"
#include "pimolap/microcode.hpp"
#include "pimolap/planner.hpp"
#include "pimolap/relation_io.hpp"
#include "pimolap/report.hpp"
#include "pimolap/workload.hpp"

using namespace pimolap;
namespace fs = std::filesystem;
using engine::ExecMode;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages of a criterion.
class Check {
 public:
  void fail(const std::string& msg) {
    ok_ = false;
    if (++count_ <= 8) msgs_ << (count_ > 1 ? "; " : "") << msg;
  }
  void expect(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
  }
  Outcome done(const std::string& summary) const {
    if (ok_) return {true, summary};
    std::string d = msgs_.str();
    if (count_ > 8) d += " (+" + std::to_string(count_ - 8) + " more)";
    return {false, d};
  }

 private:
  bool ok_ = true;
  int count_ = 0;
  std::ostringstream msgs_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const LayoutMode kLayouts[] = {LayoutMode::kOneXb, LayoutMode::kTwoXb};

struct Suite {
  Relation rel;
  std::vector<Query> queries;
};

Suite& suite() {
  static std::unique_ptr<Suite> s;
  if (!s) {
    s = std::make_unique<Suite>();
    workload::WorkloadSpec spec;
    spec.scale_factor = 0.01;
    s->rel = workload::generate(spec);
    for (const auto& t : workload::templates()) s->queries.push_back(workload::instantiate_query(t, s->rel).query);
  }
  return *s;
}

calibration::Measurements& measurements(LayoutMode mode) {
  static std::map<LayoutMode, calibration::Measurements> cache;
  auto it = cache.find(mode);
  if (it == cache.end()) it = cache.emplace(mode, calibration::measure(mode, calibration::Grid{})).first;
  return it->second;
}

const planner::ModelTables& tables(LayoutMode mode) {
  static std::map<LayoutMode, planner::ModelTables> cache;
  auto it = cache.find(mode);
  if (it == cache.end()) it = cache.emplace(mode, calibration::fit(measurements(mode), mode)).first;
  return it->second;
}

struct Resident {
  device::PimDevice dev;
  LoadedRelation rel;
  Resident(const Relation& r, LayoutMode mode) : rel(load(r, place(r.schema, mode), dev)) {}
};

Outcome geometry() {
  Check c;
  const device::DeviceGeometry g;
  c.expect(g.crossbars_per_page() == 32, "crossbars_per_page " + std::to_string(g.crossbars_per_page()));
  c.expect(g.records_per_page() == 32768, "records_per_page " + std::to_string(g.records_per_page()));
  c.expect(g.line_bits / 16 == 32, "records per line " + std::to_string(g.line_bits / 16));
  device::PimDevice dev(g);
  const auto p = dev.allocate_page();
  std::size_t xbars = 0;
  while (xbars < 64) {
    try {
      dev.crossbar(p, static_cast<std::uint32_t>(xbars));
    } catch (const Error&) {
      break;
    }
    ++xbars;
  }
  c.expect(xbars == 32, "page holds " + std::to_string(xbars) + " crossbars");
  return c.done("32 crossbars/page, 32768 records/page, 32 records/line");
}

Outcome oracle_equivalence() {
  Check c;
  auto& s = suite();
  std::size_t runs = 0;
  for (auto layout : kLayouts) {
    Resident res(s.rel, layout);
    for (const auto& q : s.queries) {
      const auto bq = bind_query(q, s.rel.schema);
      const auto expected = oracle::group_by(s.rel, bq);
      for (auto m : {ExecMode::kHybrid, ExecMode::kPimOnly, ExecMode::kHostOnly, ExecMode::kLogicAggBaseline}) {
        engine::RunOptions o;
        o.mode = m;
        o.tables = &tables(layout);
        const auto run = engine::run_query(res.rel, res.dev, bq, o);
        ++runs;
        c.expect(run.groups == expected, q.name + " " + engine::to_string(m) + " " + to_string(layout));
      }
    }
  }
  return c.done(std::to_string(runs) + " runs on " + std::to_string(s.rel.rows()) + " rows match the scan");
}

Outcome mux_semantics() {
  Check c;
  // every 4-bit value with both select values, plus an untouched neighbour
  Schema sc;
  Attribute v;
  v.name = "v";
  v.width_bits = 4;
  Attribute sel = v;
  sel.name = "sel";
  sel.width_bits = 1;
  Attribute other = v;
  other.name = "other";
  other.width_bits = 16;
  sc.attributes = {v, sel, other};
  Relation rel;
  rel.schema = sc;
  rel.columns.assign(3, {});
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 3; ++rep) {
    for (std::uint64_t x = 0; x < 16; ++x) {
      for (std::uint64_t s = 0; s < 2; ++s) {
        rel.columns[0].push_back(x);
        rel.columns[1].push_back(s);
        rel.columns[2].push_back(rng() & 0xFFFF);
      }
    }
  }
  const auto pred = bind(Predicate::compare("sel", CmpOp::kEq, {1}), sc);
  for (auto layout : kLayouts) {
    for (std::uint64_t imm = 0; imm < 16; ++imm) {
      Resident res(rel, layout);
      engine::update_where(res.rel, res.dev, pred, "v", imm, 1);
      for (std::uint64_t r = 0; r < rel.rows(); ++r) {
        const bool selected = rel.columns[1][r] == 1;
        const auto got = peek_value(res.rel, res.dev, "v", r);
        c.expect(got == (selected ? imm : rel.columns[0][r]),
                 "imm " + std::to_string(imm) + " row " + std::to_string(r) + " -> " + std::to_string(got));
        c.expect(peek_value(res.rel, res.dev, "sel", r) == rel.columns[1][r], "sel changed");
        c.expect(peek_value(res.rel, res.dev, "other", r) == rel.columns[2][r], "neighbour changed");
      }
    }
  }
  return c.done("16 values x 16 immediates x 2 selects, both layouts");
}

// T(k) = k (slope M + b0) + [k < kmax] M (a sqrt(r(k)) + b), evaluated here.
std::uint64_t argmin_latency(const planner::SqrtFit& h, const planner::LinearFit& p, double m, std::uint64_t kmax,
                             const std::function<double(std::uint64_t)>& r) {
  std::uint64_t best = 0;
  double best_t = INFINITY;
  for (std::uint64_t k = 0; k <= kmax; ++k) {
    double t = static_cast<double>(k) * (p.slope * m + p.intercept);
    if (k < kmax) t += m * (h.a * std::sqrt(std::max(0.0, r(k))) + h.b);
    if (t < best_t) {
      best_t = t;
      best = k;
    }
  }
  return best;
}

std::vector<std::uint64_t> k_grid(std::uint64_t kmax) {
  std::vector<std::uint64_t> ks;
  for (std::uint64_t k = 0; k <= std::min<std::uint64_t>(kmax, 64); ++k) ks.push_back(k);
  for (double k = 96; k < static_cast<double>(kmax); k *= 1.5) ks.push_back(static_cast<std::uint64_t>(k));
  if (kmax > 64) ks.push_back(kmax);
  return ks;
}

Outcome planner_optimality() {
  Check c;
  // synthetic schedules
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int schedules = 200;
  for (int t = 0; t < schedules; ++t) {
    const planner::SqrtFit h{std::exp(u(rng) * 14), std::exp(u(rng) * 12), 1};
    const planner::LinearFit p{std::exp(u(rng) * 10), std::exp(u(rng) * 12), 1};
    const double m = 1 + std::floor(u(rng) * 512);
    const std::uint64_t kmax = 1 + rng() % 1000;
    std::vector<double> sizes(kmax);
    for (auto& x : sizes) x = std::pow(u(rng), 1 + 6 * u(rng));
    std::sort(sizes.rbegin(), sizes.rend());
    double total = 0;
    for (auto x : sizes) total += x;
    const double sel = u(rng) * 0.2;
    std::vector<double> r(kmax + 1);
    double left = total;
    for (std::uint64_t k = 0; k <= kmax; ++k) {
      r[k] = total > 0 ? sel * std::max(0.0, left) / total : 0.0;
      if (k < kmax) left -= sizes[k];
    }
    planner::ModelTables tb;
    tb.host[2] = h;
    tb.pim_alu[1] = p;
    auto rf = [&](std::uint64_t k) { return r.at(k); };
    const auto plan = planner::plan_groupby(tb, device::AggEngine::kAlu, 2, 1, m, kmax, rf);
    const auto want = argmin_latency(h, p, m, kmax, rf);
    c.expect(plan.k == want, "schedule " + std::to_string(t) + ": k " + std::to_string(plan.k) + " vs " +
                                 std::to_string(want));
  }

  // every grouped query with exact subgroup sizes
  auto& s = suite();
  std::size_t queries = 0;
  double worst = 0;
  for (auto layout : kLayouts) {
    Resident res(s.rel, layout);
    const auto& tb = tables(layout);
    const std::uint32_t threads = 4;
    const double m = std::ceil(static_cast<double>(res.rel.page_count()) / threads);
    for (const auto& q : s.queries) {
      const auto bq = bind_query(q, s.rel.schema);
      if (bq.group_index.empty()) continue;
      const auto groups = oracle::group_by(s.rel, bq);
      std::vector<double> sizes;
      double selected = 0;
      for (const auto& [key, agg] : groups) {
        double n = 0;
        for (std::uint64_t row = 0; row < s.rel.rows(); ++row) {
          if (!oracle::match_row(bq.where, s.rel, row)) continue;
          bool same = true;
          for (std::size_t g = 0; g < key.size(); ++g) same = same && s.rel.columns[bq.group_index[g]][row] == key[g];
          n += same;
        }
        sizes.push_back(n);
        selected += n;
      }
      std::sort(sizes.rbegin(), sizes.rend());
      const double records = static_cast<double>(s.rel.rows());
      auto r_exact = [&](std::uint64_t k) {
        double left = selected;
        for (std::uint64_t i = 0; i < k && i < sizes.size(); ++i) left -= sizes[i];
        return std::max(0.0, left) / records;
      };
      const auto kmax = k_max(bq, s.rel.schema);
      std::uint32_t sreads = s.rel.schema.attributes[bq.agg_index].granules();
      for (auto g : bq.group_index) sreads += s.rel.schema.attributes[g].granules();
      const auto n = s.rel.schema.attributes[bq.agg_index].granules();

      engine::RunOptions o;
      o.threads = threads;
      o.tables = &tb;
      o.estimator = engine::Estimator::kExact;
      const auto exact = engine::run_query(res.rel, res.dev, bq, o);
      const auto want = argmin_latency(tb.host_fit(sreads), tb.pim_fit(device::AggEngine::kAlu, n), m, kmax, r_exact);
      c.expect(exact.k == want, q.name + " " + to_string(layout) + ": exact-r k " + std::to_string(exact.k) +
                                    " vs argmin " + std::to_string(want));

      // sampled plan against simulated latency over k
      o.estimator = engine::Estimator::kSample;
      const auto chosen = engine::run_query(res.rel, res.dev, bq, o);
      double best = chosen.latency_ns;
      std::uint64_t best_k = chosen.k;
      for (auto k : k_grid(kmax)) {
        o.force_k = k;
        const auto run = engine::run_query(res.rel, res.dev, bq, o);
        if (run.latency_ns < best) {
          best = run.latency_ns;
          best_k = k;
        }
      }
      o.force_k.reset();
      const double ratio = chosen.latency_ns / best;
      worst = std::max(worst, ratio);
      ++queries;
      c.expect(ratio <= 1.25, q.name + " " + to_string(layout) + ": chosen k=" + std::to_string(chosen.k) +
                                  " is " + fmt("%.3f", ratio) + "x the best (k=" + std::to_string(best_k) + ")");
    }
  }
  return c.done(std::to_string(schedules) + " schedules and " + std::to_string(queries) +
                " query plans exact; sampled plans within " + fmt("%.3f", worst) + "x of the simulated best");
}

Outcome pim_gb_invariance() {
  Check c;
  std::vector<double> per_subgroup;
  std::vector<std::uint64_t> tops;
  for (int d = 0; d < 10; ++d) {
    workload::WorkloadSpec spec;
    spec.scale_factor = 0.01;
    spec.seed = 100 + static_cast<std::uint64_t>(d);
    spec.customer_skew = 0.25 * d;
    spec.supplier_skew = 2.0 - 0.2 * d;
    spec.part_skew = 0.1 * d;
    const auto rel = workload::generate(spec);
    const auto bq = bind_query(parse_query("WHERE lo_quantity <= 30\nAGG SUM lo_revenue\nGROUPBY c_region\n"),
                               rel.schema);
    // population of the largest subgroup, to show the datasets differ
    std::map<std::uint64_t, std::uint64_t> h;
    for (auto v : rel.column("c_region")) ++h[v];
    std::uint64_t top = 0;
    for (const auto& [k, n] : h) top = std::max(top, n);
    tops.push_back(top);
    for (auto layout : kLayouts) {
      Resident res(rel, layout);
      engine::RunOptions o;
      o.mode = ExecMode::kPimOnly;
      const auto run = engine::run_query(res.rel, res.dev, bq, o);
      c.expect(run.k == 5, "k " + std::to_string(run.k));
      per_subgroup.push_back(run.gb_ns / static_cast<double>(run.k));
      // uniform synthetic data of the same size, one subgroup
      Resident syn(calibration::synthetic_relation(rel.rows(), 500 + static_cast<std::uint64_t>(d)), layout);
      per_subgroup.push_back(calibration::measure_pim_gb(syn.rel, syn.dev, 2, device::AggEngine::kAlu, d % 5));
    }
  }
  // compare like with like: (layout, measurement) slots repeat every 4 entries
  for (std::size_t i = 4; i < per_subgroup.size(); ++i) {
    c.expect(per_subgroup[i] == per_subgroup[i % 4],
             "dataset " + std::to_string(i / 4) + " slot " + std::to_string(i % 4) + ": " +
                 fmt("%.17g", per_subgroup[i]) + " vs " + fmt("%.17g", per_subgroup[i % 4]));
  }
  std::sort(tops.begin(), tops.end());
  c.expect(tops.front() != tops.back(), "datasets have identical populations");
  return c.done("10 datasets, per-subgroup latency " + fmt("%.1f", per_subgroup[0]) + " ns (one-xb), " +
                fmt("%.1f", per_subgroup[2]) + " ns (two-xb)");
}

Outcome model_fit() {
  Check c;
  double worst_host = 1;
  double worst_pim = 1;
  for (auto layout : kLayouts) {
    const auto& tb = tables(layout);
    for (std::uint32_t s = 1; s <= 4; ++s) {
      const auto& f = tb.host_fit(s);
      worst_host = std::min(worst_host, f.r2);
      c.expect(f.r2 >= 0.95, std::string(to_string(layout)) + " s=" + std::to_string(s) + " R2 " + fmt("%.5f", f.r2));
    }
    for (std::uint32_t n = 1; n <= 4; ++n) {
      for (auto e : {device::AggEngine::kAlu, device::AggEngine::kLogicOnly}) {
        const auto& f = tb.pim_fit(e, n);
        worst_pim = std::min(worst_pim, f.r2);
        c.expect(f.r2 >= 0.999, std::string(to_string(layout)) + " n=" + std::to_string(n) + " R2 " +
                                    fmt("%.6f", f.r2));
      }
    }
    // the grid really spans the requested points
    std::set<double> ms;
    std::set<double> rs;
    for (const auto& h : measurements(layout).host) {
      ms.insert(h.pages);
      rs.insert(h.r);
    }
    c.expect(ms.size() == 5, "host grid has " + std::to_string(ms.size()) + " sizes");
    c.expect(rs.size() >= 5, "host grid has " + std::to_string(rs.size()) + " selectivities");
  }
  return c.done("min host R2 " + fmt("%.5f", worst_host) + ", min pim R2 " + fmt("%.7f", worst_pim));
}

Outcome directional() {
  Check c;
  auto& s = suite();
  std::string summary;
  for (auto layout : kLayouts) {
    Resident res(s.rel, layout);
    for (const auto& q : s.queries) {
      const auto bq = bind_query(q, s.rel.schema);
      if (!bq.group_index.empty()) continue;
      engine::RunOptions o;
      o.tables = &tables(layout);
      const auto alu = engine::run_query(res.rel, res.dev, bq, o);
      o.mode = ExecMode::kLogicAggBaseline;
      const auto base = engine::run_query(res.rel, res.dev, bq, o);
      const std::string tag = q.name + " " + to_string(layout);
      c.expect(alu.k == 1 && base.k == 1, tag + ": PIM aggregations differ");
      c.expect(alu.latency_ns < base.latency_ns, tag + ": latency not lower");
      c.expect(alu.report.pim_energy < base.report.pim_energy, tag + ": energy not lower");
      c.expect(base.report.required_endurance_10y > alu.report.required_endurance_10y,
               tag + ": baseline endurance " + fmt("%.4g", base.report.required_endurance_10y) + " vs " +
                   fmt("%.4g", alu.report.required_endurance_10y));
      if (q.name == "q1.1" && layout == LayoutMode::kOneXb) {
        summary = "q1.1 one-xb baseline/ALU: latency " + fmt("%.2f", base.latency_ns / alu.latency_ns) +
                  "x, energy " + fmt("%.2f", base.report.pim_energy / alu.report.pim_energy) + "x, endurance " +
                  fmt("%.2f", base.report.required_endurance_10y / alu.report.required_endurance_10y) + "x";
      }
    }
  }
  return c.done(summary);
}

Outcome bookkeeping() {
  Check c;
  Schema sc;
  Attribute a;
  a.name = "a";
  a.width_bits = 2;
  sc.attributes = {a};
  Relation rel;
  rel.schema = sc;
  rel.columns = {std::vector<std::uint64_t>(32768)};
  for (std::size_t i = 0; i < 32768; ++i) rel.columns[0][i] = i % 4;
  Resident res(rel, LayoutMode::kOneXb);
  const auto pred = bind(Predicate::compare("a", CmpOp::kEq, {1}), sc);
  const auto prog = microcode::compile_filter(pred, res.rel.placement, 0, res.rel.placement.work[0].filter);
  c.expect(prog.cycles() == 5, "filter takes " + std::to_string(prog.cycles()) + " cycles");
  engine::Executor ex(res.rel, res.dev);
  device::HostContext ctx;
  ex.run_filter(pred, 0, {0, 1}, ctx);
  ex.wait_all({0, 1}, ctx);
  res.dev.host_read_bit_column(res.rel.pages[0][0], res.rel.placement.work[0].filter, ctx);

  const double logic = 5 * 32768 * 81.6e-15;
  const double controller = 8 * 126e-6 * (5 * 30e-9);
  const double reads = 1024 * 512 * 0.84e-12;
  const double expected = logic + controller + reads;
  const double got = res.dev.ledger().energy();
  c.expect(std::abs(got - expected) <= 1e-9 * expected,
           "energy " + fmt("%.17g", got) + " J vs " + fmt("%.17g", expected) + " J");
  c.expect(std::abs(ctx.now - (10 + 5 * 30 + 1024 * 60)) < 1e-9, "latency " + fmt("%.17g", ctx.now) + " ns");
  const double e = endurance_10y(512, 1.0);
  c.expect(e == 3.1536e8, "endurance " + fmt("%.17g", e));
  return c.done("filter energy " + fmt("%.10g", got) + " J, endurance example " + fmt("%.6g", e));
}

std::map<fs::path, std::string> tree(const fs::path& root) {
  std::map<fs::path, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root)] = ss.str();
  }
  return out;
}

// dataset -> calibration -> runs -> report, all under `root`
void pipeline(const fs::path& root) {
  workload::WorkloadSpec spec;
  spec.scale_factor = 0.003;
  spec.seed = 99;
  workload::generate_to(spec, root / "dataset");
  calibration::Grid grid;
  grid.pages = {1, 2, 4};
  const auto tb = calibration::fit(calibration::measure(LayoutMode::kOneXb, grid), LayoutMode::kOneXb);
  tb.save(root / "models" / "models_one-xb.json");

  report::RunConfig cfg;
  cfg.dataset = "dataset";
  cfg.models = "models";
  cfg.modes = {"hybrid", "host-only"};
  cfg.seed = spec.seed;
  const auto rel = load_relation(root / "dataset" / "relation");
  const auto loaded_tb = planner::ModelTables::load(root / "models" / "models_one-xb.json");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root / "dataset" / "queries")) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  Resident res(rel, LayoutMode::kOneXb);
  std::vector<report::Row> rows;
  for (const auto& m : cfg.modes) {
    for (const auto& f : files) {
      std::ifstream in(f);
      std::stringstream ss;
      ss << in.rdbuf();
      const auto q = parse_query(ss.str());
      engine::RunOptions o;
      o.mode = engine::exec_mode_from_string(m);
      o.tables = &loaded_tb;
      const auto run = engine::run_query(res.rel, res.dev, bind_query(q, rel.schema), o);
      rows.push_back(report::make_row(q.name, o.mode, LayoutMode::kOneXb, run));
    }
  }
  report::write_runs(root / "runs", cfg, rows);
  report::write_tables(root / "report", report::read_runs(root / "runs" / "runs.json"));
}

Outcome determinism() {
  Check c;
  const auto base = fs::temp_directory_path() / ("pimolap_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  pipeline(base / "a");
  pipeline(base / "b");
  const auto a = tree(base / "a");
  const auto b = tree(base / "b");
  c.expect(a.size() == b.size(), "file counts differ");
  std::size_t bytes = 0;
  for (const auto& [path, content] : a) {
    const auto it = b.find(path);
    if (it == b.end()) {
      c.fail("missing " + path.string());
      continue;
    }
    c.expect(it->second == content, path.string() + " differs");
    bytes += content.size();
  }
  c.expect(a.count("runs/runs.json") && a.count("report/summary.json") && a.count("dataset/workload.json"),
           "expected outputs missing");
  fs::remove_all(base);
  return c.done(std::to_string(a.size()) + " files, " + std::to_string(bytes) + " bytes identical");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"geometry", geometry},
      {"oracle equivalence", oracle_equivalence},
      {"masked update semantics", mux_semantics},
      {"planner optimality", planner_optimality},
      {"pim-gb invariance", pim_gb_invariance},
      {"model fit quality", model_fit},
      {"directional claims", directional},
      {"energy and endurance bookkeeping", bookkeeping},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
