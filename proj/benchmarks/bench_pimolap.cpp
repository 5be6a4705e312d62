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

// Host-side cost of the simulator itself: how fast the functional model
// executes, not simulated latencies.

#include <benchmark/benchmark.h>

#include <array>
#include <random>

#include "pimolap/crossbar.hpp"
#include "pimolap/engine.hpp"
#include "pimolap/layout.hpp"
#include "pimolap/microcode.hpp"
#include "pimolap/query.hpp"
#include "pimolap/workload.hpp"

using namespace pimolap;

static void BM_BulkNor(benchmark::State& state) {
  fabric::Crossbar x;
  std::mt19937_64 rng(1);
  for (std::uint32_t r = 0; r < x.rows(); ++r) x.write_row_bits(r, 0, rng(), 64);
  const std::array<std::uint32_t, 2> in{0, 1};
  for (auto _ : state) benchmark::DoNotOptimize(x.bulk_logic(fabric::LogicOp::kNor, in, 100));
  state.SetItemsProcessed(state.iterations() * x.rows());
}
BENCHMARK(BM_BulkNor);

static void BM_Aggregate(benchmark::State& state) {
  fabric::Crossbar x;
  std::mt19937_64 rng(2);
  for (std::uint32_t r = 0; r < x.rows(); ++r) {
    x.write_row_bits(r, 0, rng(), 64);
    x.write_row_bits(r, 200, rng() & 1, 1);
  }
  fabric::AggSpec spec;
  spec.src = {0, static_cast<std::uint32_t>(state.range(0))};
  spec.value_width_bits = spec.src.width;
  spec.dst = {96, spec.src.width + 16};
  spec.mask_col = 200;
  for (auto _ : state) benchmark::DoNotOptimize(x.aggregate(spec));
}
BENCHMARK(BM_Aggregate)->Arg(16)->Arg(32)->Arg(64);

static void BM_CompileFilter(benchmark::State& state) {
  const auto schema = workload::ssb_schema();
  const auto pl = place(schema, state.range(0) ? LayoutMode::kTwoXb : LayoutMode::kOneXb);
  const auto pred = bind(parse_predicate("p_category = 'MFGR#12' AND s_region = 'AMERICA' AND lo_quantity < 25"), schema);
  for (auto _ : state) benchmark::DoNotOptimize(microcode::compile_filter(pred, pl, 0, pl.work[0].filter));
}
BENCHMARK(BM_CompileFilter)->Arg(0)->Arg(1);

static void BM_Generate(benchmark::State& state) {
  workload::WorkloadSpec spec;
  spec.scale_factor = 0.002;
  for (auto _ : state) benchmark::DoNotOptimize(workload::generate(spec).rows());
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

static void BM_RunQuery(benchmark::State& state) {
  workload::WorkloadSpec spec;
  spec.scale_factor = 0.005;
  const auto rel = workload::generate(spec);
  device::PimDevice dev;
  const auto loaded = load(rel, place(rel.schema, LayoutMode::kOneXb), dev);
  const auto q = bind_query(parse_query("WHERE s_region = 'ASIA'\nAGG SUM lo_revenue\nGROUPBY d_year"), rel.schema);
  engine::RunOptions opts;
  opts.mode = state.range(0) ? engine::ExecMode::kPimOnly : engine::ExecMode::kHostOnly;
  for (auto _ : state) benchmark::DoNotOptimize(engine::run_query(loaded, dev, q, opts).latency_ns);
}
BENCHMARK(BM_RunQuery)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
