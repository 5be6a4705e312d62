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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pimolap/device.hpp"
#include "pimolap/layout.hpp"
#include "pimolap/ledger.hpp"
#include "pimolap/microcode.hpp"
#include "pimolap/planner.hpp"
#include "pimolap/query.hpp"

namespace pimolap::engine {

enum class ExecMode { kHybrid, kPimOnly, kHostOnly, kLogicAggBaseline };

const char* to_string(ExecMode mode);
ExecMode exec_mode_from_string(std::string_view text);

/// Codes of the group-by attributes, in GROUP BY order.
using GroupKey = std::vector<std::uint64_t>;
/// Non-empty groups only.
using GroupResults = std::map<GroupKey, fabric::AggResult>;

void merge_into(GroupResults& acc, const GroupResults& part, fabric::AggOp op);

/// How subgroup sizes are obtained for planning: sampling one page through
/// the host, or exact counts taken from the cells at no cost.
enum class Estimator { kSample, kExact };

struct PageRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  std::uint64_t size() const { return last - first; }
};

/// Contiguous, near-equal split of `pages` page ordinals among `threads`.
std::vector<PageRange> split_pages(std::uint64_t pages, std::uint32_t threads);

struct Estimates {
  /// Subgroups seen, by estimated size descending then key ascending.
  std::vector<std::pair<GroupKey, double>> seen;
  double selected = 0.0;
  double total_records = 0.0;
  std::uint64_t sample_records = 0;
  std::uint64_t sample_selected = 0;

  /// Fraction of all records left to host-gb after the k largest subgroups.
  double r(std::uint64_t k) const;
};

/// First `k` subgroups in pim-gb order: seen subgroups by estimate, then
/// the remaining feasible tuples in key order.
std::vector<GroupKey> ordered_subgroups(const Estimates* estimates,
                                        const std::vector<std::vector<std::uint64_t>>& feasible, std::uint64_t k);

/// Host-side driver of one relation on one device. Tracks when each page's
/// last request completes so the host waits before touching it again.
class Executor {
 public:
  Executor(const LoadedRelation& rel, device::PimDevice& dev, microcode::CycleTable cycles = {});

  const LoadedRelation& relation() const { return rel_; }
  device::PimDevice& device() { return dev_; }

  /// Partition holding the aggregated attribute; filters for aggregation
  /// land there.
  std::uint32_t home(const BoundQuery& q) const;

  /// Runs the steps of `prog` on every page ordinal of `range`, step by
  /// step. With \`mask_partial\`, on partially filled pages the result is
  /// ANDed with the valid bit.
  void run_program(const microcode::FilterProgram& prog, PageRange range, device::HostContext& ctx,
                   bool mask_partial = true);

  /// Materialises `pred` in the filter column of `partition`.
  void run_filter(const Predicate& bound, std::uint32_t partition, PageRange range, device::HostContext& ctx);

  /// Per subgroup: equality microcode into the subgroup column, mask = it AND
  /// filter, handled |= it, AGGREGATE, and n + 1 host line reads per page.
  void pim_gb(const BoundQuery& q, const std::vector<GroupKey>& subgroups, PageRange range,
              device::HostContext& ctx, device::AggEngine engine, GroupResults& out);

  /// Reads the selection column and the needed granules of every selected
  /// record. With `exclude_handled` the selection is filter AND NOT handled.
  void host_gb(const BoundQuery& q, bool exclude_handled, PageRange range, device::HostContext& ctx,
               GroupResults& out);

  Estimates estimate_subgroups(const BoundQuery& q, device::HostContext& ctx, Estimator estimator);

  /// MUX-writes `value` into `attribute` of rows whose filter bit is set.
  void mux_update(std::string_view attribute, std::uint64_t value, PageRange range, device::HostContext& ctx);

  /// Blocks the context until every page of `range` is idle.
  void wait_all(PageRange range, device::HostContext& ctx);

  /// Records passing the filter of `partition`, counted from the cells.
  std::uint64_t count_selected(std::uint32_t partition) const;

 private:
  device::PageId page(std::uint32_t partition, std::uint64_t ordinal) const {
    return rel_.pages[partition][ordinal];
  }
  void wait(device::PageId p, device::HostContext& ctx) const;
  void submit_seq(device::PageId p, device::RequestKind kind, device::LogicSequence seq, device::HostContext& ctx);

  struct Needed {
    std::uint32_t partition;
    std::uint32_t start;
    std::uint32_t width;
    std::uint32_t granules;
  };

  const LoadedRelation& rel_;
  device::PimDevice& dev_;
  microcode::CycleTable cycles_;
  std::vector<Nanoseconds> done_;
};

struct RunOptions {
  ExecMode mode = ExecMode::kHybrid;
  std::uint32_t threads = 4;
  std::optional<std::uint64_t> force_k;
  Estimator estimator = Estimator::kSample;
  const planner::ModelTables* tables = nullptr;
  microcode::CycleTable cycles;
};

struct QueryRun {
  GroupResults groups;
  std::uint64_t k = 0;
  std::uint64_t k_max = 1;
  std::uint64_t records = 0;
  std::uint64_t selected = 0;
  std::uint64_t sample_subgroups = 0;
  std::optional<planner::GroupByPlan> plan;
  Nanoseconds filter_ns = 0.0;
  Nanoseconds sample_ns = 0.0;
  Nanoseconds gb_ns = 0.0;
  Nanoseconds latency_ns = 0.0;
  CostReport report;

  double selectivity() const { return records ? static_cast<double>(selected) / static_cast<double>(records) : 0.0; }
};

/// Executes a query end to end. Page ordinals are split among
/// `options.threads` host threads; each phase (filter, sampling, group-by)
/// lasts as long as its slowest thread. Device statistics are reset first.
/// Hybrid and baseline modes need model tables (ModelError otherwise).
QueryRun run_query(const LoadedRelation& rel, device::PimDevice& dev, const BoundQuery& query,
                   const RunOptions& options);

struct UpdateRun {
  Nanoseconds latency_ns = 0.0;
  std::uint64_t selected = 0;
  CostReport report;
};

/// UPDATE relation SET attribute = value WHERE pred, entirely in memory.
UpdateRun update_where(const LoadedRelation& rel, device::PimDevice& dev, const Predicate& bound,
                       std::string_view attribute, std::uint64_t value, std::uint32_t threads = 4,
                       const microcode::CycleTable& cycles = {});

}  // namespace pimolap::engine
