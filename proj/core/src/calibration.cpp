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

#include "pimolap/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "pimolap/errors.hpp"
#include "pimolap/query.hpp"
#include "pimolap/workload.hpp"

namespace pimolap::calibration {

namespace {

constexpr std::uint32_t kIdentifiers = kMaxReadsPerRecord - 1;

std::string gname(std::uint32_t i) { return "g" + std::to_string(i); }
std::string vname(std::uint32_t n) { return "v" + std::to_string(n); }

Nanoseconds gb_phase(engine::Executor& ex, const BoundQuery& q, device::HostContext& ctx,
                     const std::function<void(engine::PageRange, device::HostContext&)>& body) {
  const engine::PageRange all{0, ex.relation().page_count()};
  ex.run_filter(q.where, ex.home(q), all, ctx);
  ex.wait_all(all, ctx);
  const auto t0 = ctx.now;
  body(all, ctx);
  ex.wait_all(all, ctx);
  return ctx.now - t0;
}

}  // namespace

void Grid::validate() const {
  auto distinct = [](auto v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  };
  if (distinct(pages) < 3) throw InvalidArgumentError("calibration needs at least 3 page counts");
  if (distinct(r) < 5) throw InvalidArgumentError("calibration needs at least 5 selectivities");
  for (auto m : pages) {
    if (m == 0) throw InvalidArgumentError("page counts must be positive");
  }
  for (double x : r) {
    if (!(x > 0 && x <= 1)) throw InvalidArgumentError("selectivities must lie in (0, 1]");
  }
  for (auto s : reads_per_record) {
    if (s < 1 || s > kMaxReadsPerRecord) throw InvalidArgumentError("reads per record must be in 1..6");
  }
  for (auto n : granules) {
    if (n < 1 || n > kMaxGranules) throw InvalidArgumentError("granule counts must be in 1..4");
  }
}

Schema synthetic_schema() {
  Schema s;
  for (std::uint32_t i = 0; i < kIdentifiers; ++i) {
    Attribute a;
    a.name = gname(i);
    a.width_bits = 16;
    a.origin = "dim";
    s.attributes.push_back(a);
  }
  for (std::uint32_t n = 1; n <= kMaxGranules; ++n) {
    Attribute a;
    a.name = vname(n);
    a.width_bits = 16 * n;
    s.attributes.push_back(a);
  }
  Attribute sel;
  sel.name = "sel";
  sel.width_bits = 16;
  s.attributes.push_back(sel);
  s.validate();
  return s;
}

Relation synthetic_relation(std::uint64_t records, std::uint64_t seed) {
  Relation rel;
  rel.schema = synthetic_schema();
  workload::Rng rng(seed);
  rel.columns.resize(rel.schema.attributes.size());
  for (std::size_t a = 0; a < rel.schema.attributes.size(); ++a) {
    const auto w = rel.schema.attributes[a].width_bits;
    const std::uint64_t mask = w >= 64 ? ~0ULL : (1ULL << w) - 1;
    auto& col = rel.columns[a];
    col.resize(records);
    for (auto& v : col) v = rng.next() & mask;
  }
  rel.validate();
  return rel;
}

Nanoseconds measure_host_gb(const LoadedRelation& rel, device::PimDevice& dev, std::uint32_t reads_per_record,
                            double r, double* r_actual, const microcode::CycleTable& cycles) {
  if (reads_per_record < 1 || reads_per_record > kMaxReadsPerRecord) {
    throw InvalidArgumentError("reads per record must be in 1..6");
  }
  Query q;
  q.name = "host-gb";
  const auto threshold = static_cast<std::uint64_t>(std::ceil(r * 65536.0));
  q.where = Predicate::compare("sel", CmpOp::kLt, {std::min<std::uint64_t>(threshold, 65535)});
  if (threshold > 65535) q.where = Predicate::always();
  q.agg = {fabric::AggOp::kSum, vname(1)};
  for (std::uint32_t i = 0; i + 1 < reads_per_record; ++i) q.group_by.push_back(gname(i));
  const auto bound = bind_query(q, rel.placement.schema);

  dev.reset_stats();
  engine::Executor ex(rel, dev, cycles);
  device::HostContext ctx;
  engine::GroupResults out;
  const auto t = gb_phase(ex, bound, ctx, [&](engine::PageRange range, device::HostContext& c) {
    ex.host_gb(bound, false, range, c, out);
  });
  if (r_actual) {
    *r_actual = static_cast<double>(ex.count_selected(ex.home(bound))) / static_cast<double>(rel.records);
  }
  return t;
}

Nanoseconds measure_pim_gb(const LoadedRelation& rel, device::PimDevice& dev, std::uint32_t granules,
                           device::AggEngine engine_kind, std::uint64_t key, const microcode::CycleTable& cycles) {
  if (granules < 1 || granules > kMaxGranules) throw InvalidArgumentError("granule count must be in 1..4");
  Query q;
  q.name = "pim-gb";
  q.agg = {fabric::AggOp::kSum, vname(granules)};
  q.group_by = {gname(0)};
  const auto bound = bind_query(q, rel.placement.schema);

  dev.reset_stats();
  engine::Executor ex(rel, dev, cycles);
  device::HostContext ctx;
  engine::GroupResults out;
  return gb_phase(ex, bound, ctx, [&](engine::PageRange range, device::HostContext& c) {
    ex.pim_gb(bound, {engine::GroupKey{key}}, range, c, engine_kind, out);
  });
}

Measurements measure(LayoutMode layout, const Grid& grid, const device::DeviceGeometry& geometry,
                     const CostParams& params, const microcode::CycleTable& cycles) {
  grid.validate();
  const auto placement = place(synthetic_schema(), layout, geometry.xbar_cols);
  Measurements m;
  for (auto pages : grid.pages) {
    device::PimDevice dev(geometry, params);
    const auto rel = load(synthetic_relation(pages * geometry.records_per_page(), grid.seed + pages), placement, dev);
    const auto M = static_cast<double>(pages);
    for (auto s : grid.reads_per_record) {
      for (double r : grid.r) {
        double actual = 0.0;
        const auto t = measure_host_gb(rel, dev, s, r, &actual, cycles);
        m.host.push_back({s, M, actual, t});
      }
    }
    for (auto n : grid.granules) {
      m.pim_alu.push_back({n, M, measure_pim_gb(rel, dev, n, device::AggEngine::kAlu, 0, cycles)});
      m.pim_logic.push_back({n, M, measure_pim_gb(rel, dev, n, device::AggEngine::kLogicOnly, 0, cycles)});
    }
  }
  return m;
}

planner::ModelTables fit(const Measurements& m, LayoutMode layout) {
  planner::ModelTables t;
  t.layout = to_string(layout);
  t.host = planner::fit_host(m.host);
  t.pim_alu = planner::fit_pim(m.pim_alu);
  t.pim_logic = planner::fit_pim(m.pim_logic);
  return t;
}

}  // namespace pimolap::calibration
