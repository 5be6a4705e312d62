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

#include "pimolap/engine.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "pimolap/errors.hpp"

namespace pimolap::engine {

__extension__ using U128 = unsigned __int128;

using device::HostContext;
using device::LogicSequence;
using device::PageId;
using device::RequestKind;
using fabric::LogicOp;

const char* to_string(ExecMode mode) {
  switch (mode) {
    case ExecMode::kHybrid: return "hybrid";
    case ExecMode::kPimOnly: return "pim-only";
    case ExecMode::kHostOnly: return "host-only";
    case ExecMode::kLogicAggBaseline: return "logic-agg-baseline";
  }
  return "?";
}

ExecMode exec_mode_from_string(std::string_view text) {
  if (text == "hybrid") return ExecMode::kHybrid;
  if (text == "pim-only") return ExecMode::kPimOnly;
  if (text == "host-only") return ExecMode::kHostOnly;
  if (text == "logic-agg-baseline") return ExecMode::kLogicAggBaseline;
  throw InvalidArgumentError("unknown execution mode '" + std::string(text) +
                             "' (hybrid|pim-only|host-only|logic-agg-baseline)");
}

void merge_into(GroupResults& acc, const GroupResults& part, fabric::AggOp op) {
  for (const auto& [key, res] : part) {
    auto [it, inserted] = acc.try_emplace(key, res);
    if (!inserted) fabric::agg_merge(op, it->second, res);
  }
}

std::vector<PageRange> split_pages(std::uint64_t pages, std::uint32_t threads) {
  if (threads == 0) throw InvalidArgumentError("at least one thread is required");
  std::vector<PageRange> out;
  for (std::uint32_t t = 0; t < threads; ++t) out.push_back({pages * t / threads, pages * (t + 1) / threads});
  return out;
}

double Estimates::r(std::uint64_t k) const {
  if (total_records <= 0) return 0.0;
  double left = selected;
  for (std::uint64_t i = 0; i < k && i < seen.size(); ++i) left -= seen[i].second;
  return std::max(0.0, left) / total_records;
}

namespace {

bool feasible_key(const GroupKey& key, const std::vector<std::vector<std::uint64_t>>& feasible) {
  if (key.size() != feasible.size()) return false;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (!std::binary_search(feasible[i].begin(), feasible[i].end(), key[i])) return false;
  }
  return true;
}

}  // namespace

std::vector<GroupKey> ordered_subgroups(const Estimates* estimates,
                                        const std::vector<std::vector<std::uint64_t>>& feasible, std::uint64_t k) {
  std::vector<GroupKey> out;
  std::set<GroupKey> taken;
  if (estimates) {
    for (const auto& [key, est] : estimates->seen) {
      if (out.size() >= k) return out;
      if (feasible_key(key, feasible)) {
        out.push_back(key);
        taken.insert(key);
      }
    }
  }
  if (out.size() >= k) return out;
  for (const auto& f : feasible) {
    if (f.empty()) return out;
  }
  std::vector<std::size_t> idx(feasible.size(), 0);
  while (out.size() < k) {
    GroupKey key(feasible.size());
    for (std::size_t i = 0; i < feasible.size(); ++i) key[i] = feasible[i][idx[i]];
    if (!taken.count(key)) out.push_back(std::move(key));
    std::size_t d = feasible.size();
    while (d > 0) {
      --d;
      if (++idx[d] < feasible[d].size()) break;
      idx[d] = 0;
      if (d == 0) return out;
    }
    if (feasible.empty()) break;
  }
  return out;
}

Executor::Executor(const LoadedRelation& rel, device::PimDevice& dev, microcode::CycleTable cycles)
    : rel_(rel), dev_(dev), cycles_(cycles), done_(dev.page_count(), 0.0) {}

std::uint32_t Executor::home(const BoundQuery& q) const {
  return rel_.placement.attrs[q.agg_index].partition;
}

void Executor::wait(PageId p, HostContext& ctx) const { ctx.now = std::max(ctx.now, done_[p.value]); }

void Executor::submit_seq(PageId p, RequestKind kind, LogicSequence seq, HostContext& ctx) {
  wait(p, ctx);
  device::PimRequest req{p, kind, std::move(seq), device::AggEngine::kAlu};
  done_[p.value] = dev_.submit(req, ctx);
}

void Executor::wait_all(PageRange range, HostContext& ctx) {
  for (std::uint64_t i = range.first; i < range.last; ++i) {
    for (std::uint32_t p = 0; p < rel_.placement.partitions(); ++p) wait(page(p, i), ctx);
  }
}

void Executor::run_program(const microcode::FilterProgram& prog, PageRange range, HostContext& ctx,
                           bool mask_partial) {
  if (prog.steps.empty()) return;
  const auto& geom = dev_.geometry();
  const auto last = prog.steps.size() - 1;
  const auto* final_stage = std::get_if<microcode::PartitionStage>(&prog.steps[last]);
  if (!final_stage || final_stage->partition != prog.result_partition) {
    throw InvalidArgumentError("program must end in its result partition");
  }
  LogicSequence masked = final_stage->seq;
  masked.emit(cycles_.ops, LogicOp::kAnd, {prog.result_col, rel_.placement.work[prog.result_partition].valid},
              prog.result_col);

  for (std::size_t s = 0; s < prog.steps.size(); ++s) {
    for (std::uint64_t i = range.first; i < range.last; ++i) {
      if (const auto* st = std::get_if<microcode::PartitionStage>(&prog.steps[s])) {
        const bool partial = mask_partial && rel_.records_on_page(i, geom) < geom.records_per_page();
        submit_seq(page(st->partition, i), RequestKind::kLogicSeq, s == last && partial ? masked : st->seq, ctx);
      } else {
        const auto& t = std::get<microcode::BitTransfer>(prog.steps[s]);
        const auto src = page(t.from_partition, i);
        const auto dst = page(t.to_partition, i);
        wait(src, ctx);
        wait(dst, ctx);
        dev_.transfer_bitvector(src, t.src_col, dst, t.dst_col, ctx);
        done_[src.value] = std::max(done_[src.value], ctx.now);
        done_[dst.value] = std::max(done_[dst.value], ctx.now);
      }
    }
  }
}

void Executor::run_filter(const Predicate& bound, std::uint32_t partition, PageRange range, HostContext& ctx) {
  const auto prog =
      microcode::compile_filter(bound, rel_.placement, partition, rel_.placement.work[partition].filter, cycles_);
  run_program(prog, range, ctx);
}

namespace {

GroupKey key_of(const std::vector<std::uint64_t>& values) { return values; }

}  // namespace

void Executor::pim_gb(const BoundQuery& q, const std::vector<GroupKey>& subgroups, PageRange range,
                      HostContext& ctx, device::AggEngine engine, GroupResults& out) {
  if (range.size() == 0 || subgroups.empty()) return;
  const auto& pl = rel_.placement;
  const auto h = home(q);
  const auto& w = pl.work[h];
  const auto& agg_attr = pl.schema.attributes[q.agg_index];
  const auto& ap = pl.attrs[q.agg_index];

  fabric::AggSpec spec;
  spec.op = q.query.agg.op;
  spec.value_width_bits = agg_attr.slot_bits();
  spec.src = {ap.cols.start, agg_attr.slot_bits()};
  spec.dst = {w.agg_dst.start, agg_attr.slot_bits() + fabric::kGranuleBits};
  spec.mask_col = q.group_index.empty() ? w.filter : w.mask;
  spec.result_row = 0;
  const std::uint32_t dst_granule0 = spec.dst.start / fabric::kGranuleBits;
  const std::uint32_t dst_granules = spec.dst_granules();

  for (std::size_t g = 0; g < subgroups.size(); ++g) {
    const auto& key = subgroups[g];
    if (key.size() != q.group_index.size()) throw InvalidArgumentError("subgroup key arity mismatch");
    if (!q.group_index.empty()) {
      std::vector<Predicate> eqs;
      for (std::size_t i = 0; i < key.size(); ++i) {
        const auto& a = pl.schema.attributes[q.group_index[i]];
        if (key[i] > a.max_code()) {
          throw OutOfRangeError("subgroup value " + std::to_string(key[i]) + " outside the domain of " + a.name);
        }
        eqs.push_back(Predicate::compare(a.name, CmpOp::kEq, {Literal(key[i])}));
      }
      auto prog = microcode::compile_filter(bind(Predicate::all_of(std::move(eqs)), pl.schema), pl, h, w.subgroup,
                                            cycles_);
      auto& tail = std::get<microcode::PartitionStage>(prog.steps.back()).seq;
      tail.emit(cycles_.ops, LogicOp::kAnd, {w.subgroup, w.filter}, w.mask);
      if (g == 0) {
        tail.emit(cycles_.ops, LogicOp::kOr, {w.subgroup}, w.handled);
      } else {
        tail.emit(cycles_.ops, LogicOp::kOr, {w.handled, w.subgroup}, w.handled);
      }
      // Selection bits are already restricted to valid rows by the filter.
      run_program(prog, range, ctx, false);
    }
    for (std::uint64_t i = range.first; i < range.last; ++i) {
      const auto p = page(h, i);
      wait(p, ctx);
      device::PimRequest req{p, RequestKind::kAggregate, spec, engine};
      done_[p.value] = dev_.submit(req, ctx);
    }
    auto& acc = out[key_of(key)];
    for (std::uint64_t i = range.first; i < range.last; ++i) {
      const auto p = page(h, i);
      wait(p, ctx);
      std::vector<U128> partial;
      for (std::uint32_t gi = 0; gi < dst_granules; ++gi) {
        const auto line = dev_.host_read_line(p, spec.result_row, dst_granule0 + gi, ctx);
        if (partial.empty()) partial.assign(line.size(), 0);
        for (std::size_t c = 0; c < line.size(); ++c) {
          partial[c] |= static_cast<U128>(line[c]) << (fabric::kGranuleBits * gi);
        }
      }
      const std::uint32_t flag_bit = spec.dst.width - 1;
      for (auto v : partial) {
        fabric::AggResult r;
        r.empty = ((v >> flag_bit) & 1) == 0;
        r.value = static_cast<std::uint64_t>(v & ((static_cast<U128>(1) << flag_bit) - 1));
        fabric::agg_merge(spec.op, acc, r);
      }
    }
    if (acc.empty) out.erase(key_of(key));
  }
}

void Executor::host_gb(const BoundQuery& q, bool exclude_handled, PageRange range, HostContext& ctx,
                       GroupResults& out) {
  if (range.size() == 0) return;
  const auto& pl = rel_.placement;
  const auto& params = dev_.params();
  const auto h = home(q);
  const auto& w = pl.work[h];
  const std::uint32_t col = exclude_handled ? w.hostsel : w.filter;

  std::vector<Needed> needed;
  auto need = [&](std::size_t attr) {
    const auto& ap = pl.attrs[attr];
    needed.push_back({ap.partition, ap.cols.start, ap.cols.width, pl.schema.attributes[attr].granules()});
  };
  for (auto g : q.group_index) need(g);
  need(q.agg_index);
  std::vector<std::uint64_t> granules_in(pl.partitions(), 0);
  std::uint64_t reads_per_record = 0;
  for (const auto& n : needed) {
    granules_in[n.partition] += n.granules;
    reads_per_record += n.granules;
  }

  if (exclude_handled) {
    LogicSequence seq;
    seq.emit(cycles_.ops, LogicOp::kAndNot, {w.filter, w.handled}, w.hostsel);
    for (std::uint64_t i = range.first; i < range.last; ++i) submit_seq(page(h, i), RequestKind::kLogicSeq, seq, ctx);
  }

  const auto op = q.query.agg.op;
  const std::size_t groups = q.group_index.size();
  GroupKey key(groups);
  for (std::uint64_t i = range.first; i < range.last; ++i) {
    const auto hp = page(h, i);
    wait(hp, ctx);
    const auto bits = dev_.host_read_bit_column(hp, col, ctx);
    const auto rows = dev_.geometry().xbar_rows;
    std::uint64_t rows_touched = 0;
    std::uint64_t selected = 0;
    for (std::uint32_t r = 0; r < rows; ++r) {
      bool any = false;
      for (std::size_t c = 0; c < bits.size(); ++c) {
        if (!((bits[c][r / 64] >> (r % 64)) & 1)) continue;
        any = true;
        ++selected;
        for (std::size_t gi = 0; gi < groups; ++gi) {
          const auto& n = needed[gi];
          key[gi] = dev_.crossbar(page(n.partition, i), static_cast<std::uint32_t>(c)).peek_bits(r, n.start, n.width);
        }
        const auto& v = needed.back();
        const auto value = dev_.crossbar(page(v.partition, i), static_cast<std::uint32_t>(c)).peek_bits(r, v.start, v.width);
        auto [it, inserted] = out.try_emplace(key, fabric::AggResult{fabric::agg_identity(op, 64), true});
        (void)inserted;
        fabric::agg_combine(op, it->second, value);
      }
      rows_touched += any;
    }
    for (std::uint32_t p = 0; p < pl.partitions(); ++p) {
      if (granules_in[p] && rows_touched) dev_.charge_line_reads(page(p, i), rows_touched * granules_in[p], ctx);
    }
    ctx.now += static_cast<double>(selected * reads_per_record) * params.t_host_record;
  }
}

Estimates Executor::estimate_subgroups(const BoundQuery& q, HostContext& ctx, Estimator estimator) {
  const auto& pl = rel_.placement;
  const auto& geom = dev_.geometry();
  const auto h = home(q);
  const auto& w = pl.work[h];
  Estimates est;
  est.total_records = static_cast<double>(rel_.records);
  if (rel_.page_count() == 0) return est;

  std::vector<Needed> needed;
  std::vector<std::uint64_t> granules_in(pl.partitions(), 0);
  for (auto g : q.group_index) {
    const auto& ap = pl.attrs[g];
    needed.push_back({ap.partition, ap.cols.start, ap.cols.width, pl.schema.attributes[g].granules()});
    granules_in[ap.partition] += needed.back().granules;
  }
  std::uint64_t id_granules = 0;
  for (auto n : granules_in) id_granules += n;

  std::map<GroupKey, std::uint64_t> counts;
  const std::uint64_t pages = estimator == Estimator::kSample ? 1 : rel_.page_count();
  GroupKey key(needed.size());
  for (std::uint64_t i = 0; i < pages; ++i) {
    std::vector<std::vector<std::uint64_t>> bits;
    if (estimator == Estimator::kSample) {
      wait(page(h, i), ctx);
      bits = dev_.host_read_bit_column(page(h, i), w.filter, ctx);
    } else {
      for (std::uint32_t c = 0; c < geom.crossbars_per_page(); ++c) {
        auto words = dev_.crossbar(page(h, i), c).column_words(w.filter);
        bits.emplace_back(words.begin(), words.end());
      }
    }
    std::uint64_t rows_touched = 0;
    std::uint64_t selected = 0;
    for (std::uint32_t r = 0; r < geom.xbar_rows; ++r) {
      bool any = false;
      for (std::size_t c = 0; c < bits.size(); ++c) {
        if (!((bits[c][r / 64] >> (r % 64)) & 1)) continue;
        any = true;
        ++selected;
        for (std::size_t gi = 0; gi < needed.size(); ++gi) {
          const auto& n = needed[gi];
          key[gi] = dev_.crossbar(page(n.partition, i), static_cast<std::uint32_t>(c)).peek_bits(r, n.start, n.width);
        }
        ++counts[key];
      }
      rows_touched += any;
    }
    est.sample_records += rel_.records_on_page(i, geom);
    est.sample_selected += selected;
    if (estimator == Estimator::kSample) {
      for (std::uint32_t p = 0; p < pl.partitions(); ++p) {
        if (granules_in[p] && rows_touched) dev_.charge_line_reads(page(p, i), rows_touched * granules_in[p], ctx);
      }
      ctx.now += static_cast<double>(selected * id_granules) * dev_.params().t_host_record;
    }
  }
  const double scale = est.sample_records ? est.total_records / static_cast<double>(est.sample_records) : 0.0;
  est.selected = static_cast<double>(est.sample_selected) * scale;
  for (const auto& [k, c] : counts) est.seen.emplace_back(k, static_cast<double>(c) * scale);
  std::stable_sort(est.seen.begin(), est.seen.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return est;
}

void Executor::mux_update(std::string_view attribute, std::uint64_t value, PageRange range, HostContext& ctx) {
  const auto& pl = rel_.placement;
  const auto& ap = pl.at(attribute);
  const auto& w = pl.work[ap.partition];
  const auto seq = microcode::compile_mux({ap.cols, value, w.filter, w.notselect}, cycles_.ops);
  for (std::uint64_t i = range.first; i < range.last; ++i) {
    submit_seq(page(ap.partition, i), RequestKind::kMuxUpdate, seq, ctx);
  }
}

std::uint64_t Executor::count_selected(std::uint32_t partition) const {
  const auto& geom = dev_.geometry();
  const auto col = rel_.placement.work[partition].filter;
  std::uint64_t n = 0;
  for (std::uint64_t i = 0; i < rel_.page_count(); ++i) {
    for (std::uint32_t c = 0; c < geom.crossbars_per_page(); ++c) {
      for (auto word : dev_.crossbar(page(partition, i), c).column_words(col)) n += std::popcount(word);
    }
  }
  return n;
}

QueryRun run_query(const LoadedRelation& rel, device::PimDevice& dev, const BoundQuery& query,
                   const RunOptions& options) {
  dev.reset_stats();
  Executor ex(rel, dev, options.cycles);
  const auto& schema = rel.placement.schema;
  const bool grouped = !query.group_index.empty();
  const auto feasible = feasible_group_values(query, schema);
  QueryRun run;
  run.records = rel.records;
  run.k_max = grouped ? k_max(query, schema) : 1;

  const auto ranges = split_pages(rel.page_count(), options.threads);
  std::uint64_t pages_per_thread = 0;
  for (const auto& r : ranges) pages_per_thread = std::max(pages_per_thread, r.size());
  const auto h = ex.home(query);

  Nanoseconds filter_end = 0.0;
  for (const auto& r : ranges) {
    HostContext ctx;
    ex.run_filter(query.where, h, r, ctx);
    ex.wait_all(r, ctx);
    filter_end = std::max(filter_end, ctx.now);
  }
  run.filter_ns = filter_end;
  run.selected = ex.count_selected(h);

  const bool baseline = options.mode == ExecMode::kLogicAggBaseline;
  const auto engine = baseline ? device::AggEngine::kLogicOnly : device::AggEngine::kAlu;
  std::optional<Estimates> est;
  Nanoseconds sample_end = filter_end;
  auto estimate = [&] {
    HostContext ctx{filter_end, filter_end};
    est = ex.estimate_subgroups(query, ctx, options.estimator);
    sample_end = ctx.now;
    run.sample_subgroups = est->seen.size();
  };

  std::uint64_t k = 0;
  switch (options.mode) {
    case ExecMode::kHostOnly: k = 0; break;
    case ExecMode::kPimOnly: k = run.k_max; break;
    case ExecMode::kHybrid:
    case ExecMode::kLogicAggBaseline:
      if (!grouped) {
        k = 1;
        break;
      }
      if (!options.tables) throw ModelError(std::string(to_string(options.mode)) + " mode needs fitted model tables");
      estimate();
      {
        const auto n = schema.attributes[query.agg_index].granules();
        std::uint32_t s = n;
        for (auto g : query.group_index) s += schema.attributes[g].granules();
        run.plan = planner::plan_groupby(*options.tables, engine, s, n, static_cast<double>(pages_per_thread),
                                         run.k_max, [&](std::uint64_t kk) { return est->r(kk); });
        k = run.plan->k;
      }
      break;
  }
  if (options.force_k) {
    k = std::min(*options.force_k, run.k_max);
    if (grouped && !est && k > 0 && k < run.k_max) estimate();
  }
  run.k = k;
  run.sample_ns = sample_end - filter_end;

  const auto subgroups = grouped ? ordered_subgroups(est ? &*est : nullptr, feasible, k) : std::vector<GroupKey>(k);
  Nanoseconds gb_end = sample_end;
  for (const auto& r : ranges) {
    HostContext ctx{sample_end, sample_end};
    GroupResults part;
    if (k > 0) ex.pim_gb(query, subgroups, r, ctx, engine, part);
    if (k < run.k_max) ex.host_gb(query, k > 0 && grouped, r, ctx, part);
    ex.wait_all(r, ctx);
    gb_end = std::max(gb_end, ctx.now);
    merge_into(run.groups, part, query.query.agg.op);
  }
  run.gb_ns = gb_end - sample_end;
  run.latency_ns = gb_end;
  run.report = dev.ledger().report(dev.max_row_writes(), run.latency_ns * 1e-9);
  return run;
}

UpdateRun update_where(const LoadedRelation& rel, device::PimDevice& dev, const Predicate& bound,
                       std::string_view attribute, std::uint64_t value, std::uint32_t threads,
                       const microcode::CycleTable& cycles) {
  dev.reset_stats();
  Executor ex(rel, dev, cycles);
  const auto& ap = rel.placement.at(attribute);
  rel.placement.schema.at(attribute).encode(value);
  UpdateRun run;
  Nanoseconds end = 0.0;
  for (const auto& r : split_pages(rel.page_count(), threads)) {
    HostContext ctx;
    ex.run_filter(bound, ap.partition, r, ctx);
    ex.mux_update(attribute, value, r, ctx);
    ex.wait_all(r, ctx);
    end = std::max(end, ctx.now);
  }
  run.selected = ex.count_selected(ap.partition);
  run.latency_ns = end;
  run.report = dev.ledger().report(dev.max_row_writes(), end * 1e-9);
  return run;
}

}  // namespace pimolap::engine
