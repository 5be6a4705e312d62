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

#include "pimolap/device.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "pimolap/errors.hpp"

namespace pimolap::device {

using fabric::kGranuleBits;

std::uint32_t DeviceGeometry::crossbars_per_page() const {
  return static_cast<std::uint32_t>(page_bytes * 8 / (std::uint64_t{xbar_rows} * xbar_cols));
}

std::uint32_t DeviceGeometry::crossbars_per_page_per_chip() const {
  return crossbars_per_page() / chips;
}

std::uint64_t DeviceGeometry::records_per_page() const {
  return std::uint64_t{xbar_rows} * crossbars_per_page();
}

std::uint32_t DeviceGeometry::granules_per_line_per_chip() const {
  return line_bits / kGranuleBits / chips;
}

std::uint64_t DeviceGeometry::max_pages() const { return capacity_bytes / page_bytes; }

void DeviceGeometry::validate() const {
  if (chips == 0 || xbar_rows == 0 || xbar_cols == 0 || page_bytes == 0) {
    throw InvalidArgumentError("device geometry has a zero dimension");
  }
  if (page_bytes * 8 % (std::uint64_t{xbar_rows} * xbar_cols) != 0 || crossbars_per_page() == 0) {
    throw InvalidArgumentError("page size is not a whole number of crossbars");
  }
  if (crossbars_per_page() % chips != 0) {
    throw InvalidArgumentError("crossbars of a page do not split evenly across chips");
  }
  if (line_bits != kGranuleBits * crossbars_per_page()) {
    throw InvalidArgumentError("host line must carry one granule per crossbar of a page");
  }
  if (xbar_cols % kGranuleBits != 0) throw InvalidArgumentError("crossbar columns must be whole granules");
}

void LogicSequence::emit(const fabric::LogicCosts& costs, fabric::LogicOp op,
                         std::vector<std::uint32_t> in, std::uint32_t out) {
  cycles += costs.cycles(op);
  ops.push_back(MicroOp{op, std::move(in), out});
}

void LogicSequence::append(const LogicSequence& other) {
  ops.insert(ops.end(), other.ops.begin(), other.ops.end());
  cycles += other.cycles;
}

PimDevice::PimDevice(DeviceGeometry geometry, CostParams params, fabric::WritePolicy policy,
                     fabric::LogicCosts logic_costs)
    : geometry_(geometry),
      policy_(policy),
      logic_costs_(logic_costs),
      ledger_(params, geometry.chips) {
  geometry_.validate();
}

PageId PimDevice::allocate_page() {
  if (pages_.size() >= geometry_.max_pages()) {
    throw CapacityError("module capacity of " + std::to_string(geometry_.capacity_bytes) +
                        " bytes exhausted");
  }
  PageId id{static_cast<std::uint32_t>(pages_.size())};
  Page page;
  page.crossbars.reserve(geometry_.crossbars_per_page());
  for (std::uint32_t i = 0; i < geometry_.crossbars_per_page(); ++i) {
    page.crossbars.emplace_back(geometry_.xbar_rows, geometry_.xbar_cols, policy_);
  }
  page.controller.page = id;
  pages_.push_back(std::move(page));
  return id;
}

PimDevice::Page& PimDevice::page_at(PageId id) {
  if (id.value >= pages_.size()) throw OutOfRangeError("unknown page " + std::to_string(id.value));
  return pages_[id.value];
}

const PimDevice::Page& PimDevice::page_at(PageId id) const {
  if (id.value >= pages_.size()) throw OutOfRangeError("unknown page " + std::to_string(id.value));
  return pages_[id.value];
}

fabric::Crossbar& PimDevice::crossbar(PageId page, std::uint32_t index) {
  auto& p = page_at(page);
  if (index >= p.crossbars.size()) throw OutOfRangeError("crossbar index " + std::to_string(index));
  return p.crossbars[index];
}

const fabric::Crossbar& PimDevice::crossbar(PageId page, std::uint32_t index) const {
  const auto& p = page_at(page);
  if (index >= p.crossbars.size()) throw OutOfRangeError("crossbar index " + std::to_string(index));
  return p.crossbars[index];
}

const PimController& PimDevice::controller(PageId page) const { return page_at(page).controller; }

void PimDevice::validate(const LogicSequence& seq, bool mux) const {
  for (const auto& op : seq.ops) {
    if (op.out >= geometry_.xbar_cols) throw OutOfRangeError("microcode output column out of range");
    if (op.in.empty()) throw InvalidArgumentError("microcode step without inputs");
    for (std::size_t i = 0; i < op.in.size(); ++i) {
      if (op.in[i] >= geometry_.xbar_cols) throw OutOfRangeError("microcode input column out of range");
      const bool in_place_ok = op.op == fabric::LogicOp::kOr || op.op == fabric::LogicOp::kAnd ||
                               op.op == fabric::LogicOp::kAndNot;
      if (op.in[i] == op.out && !(in_place_ok && i == 0)) {
        throw InvalidArgumentError("microcode step output aliases an input");
      }
    }
    if (mux && !(op.op == fabric::LogicOp::kNot ||
                 ((op.op == fabric::LogicOp::kOr || op.op == fabric::LogicOp::kAnd) && op.in[0] == op.out))) {
      throw InvalidArgumentError("MUX update may only use NOT and in-place OR/AND steps");
    }
  }
}

Nanoseconds PimDevice::execute_logic(Page& page, const LogicSequence& seq, Nanoseconds start) {
  std::uint64_t writes = 0;
  for (auto& xb : page.crossbars) {
    for (const auto& op : seq.ops) writes += xb.bulk_logic(op.op, op.in, op.out);
  }
  ledger_.note_cell_writes(writes);
  const Nanoseconds duration = static_cast<double>(seq.cycles) * params().t_logic_cycle;
  const double bits_per_cycle = static_cast<double>(geometry_.xbar_rows) * geometry_.crossbars_per_page();
  ledger_.charge(EventKind::kLogicCycle, static_cast<double>(seq.cycles) * bits_per_cycle, start, duration);
  ledger_.charge(EventKind::kControllerActive, geometry_.chips, start, duration);
  return duration;
}

Nanoseconds PimDevice::execute_aggregate(Page& page, const fabric::AggSpec& spec, AggEngine engine,
                                         Nanoseconds start) {
  for (const auto& xb : page.crossbars) xb.check(spec);
  const auto& p = params();
  const double xbars = geometry_.crossbars_per_page();
  const double rows = geometry_.xbar_rows;

  std::uint64_t writes = 0;
  for (auto& xb : page.crossbars) {
    const auto before = xb.total_writes();
    xb.aggregate(spec);
    writes += xb.total_writes() - before;
  }

  Nanoseconds compute = 0.0;
  if (engine == AggEngine::kAlu) {
    const double reads_per_xbar = rows * spec.value_granules();
    compute = reads_per_xbar * p.t_read;
    ledger_.charge(EventKind::kGranuleRead, xbars * reads_per_xbar * kGranuleBits, start, compute);
  } else {
    const auto log_rows = static_cast<std::uint64_t>(std::bit_width(geometry_.xbar_rows) - 1);
    const std::uint64_t cycles = std::uint64_t{p.logic_agg_factor} * spec.value_width_bits * log_rows;
    compute = static_cast<double>(cycles) * p.t_logic_cycle;
    ledger_.charge(EventKind::kLogicCycle, static_cast<double>(cycles) * rows * xbars, start, compute);
    for (auto& xb : page.crossbars) xb.add_uniform_row_writes(cycles);
    writes += cycles * geometry_.xbar_rows * page.crossbars.size();
  }
  ledger_.charge(EventKind::kGranuleWrite, xbars * spec.dst.width, start + compute, p.t_write);
  ledger_.note_cell_writes(writes);

  const Nanoseconds duration = compute + p.t_write;
  if (engine == AggEngine::kAlu) ledger_.charge(EventKind::kAggActive, xbars, start, duration);
  ledger_.charge(EventKind::kControllerActive, geometry_.chips, start, duration);
  return duration;
}

Nanoseconds PimDevice::submit(const PimRequest& req, HostContext& ctx) {
  Page& page = page_at(req.page);
  switch (req.kind) {
    case RequestKind::kLogicSeq:
    case RequestKind::kMuxUpdate:
      if (!std::holds_alternative<LogicSequence>(req.payload)) {
        throw InvalidArgumentError("logic request without a microcode payload");
      }
      validate(std::get<LogicSequence>(req.payload), req.kind == RequestKind::kMuxUpdate);
      break;
    case RequestKind::kAggregate:
      if (!std::holds_alternative<fabric::AggSpec>(req.payload)) {
        throw InvalidArgumentError("aggregate request without an aggregation spec");
      }
      page.crossbars.front().check(std::get<fabric::AggSpec>(req.payload));
      break;
  }

  const Nanoseconds dispatch_start = std::max(ctx.now, ctx.channel_free);
  const Nanoseconds start = dispatch_start + params().t_dispatch;
  ctx.channel_free = start;
  if (page.controller.busy_until > start) {
    throw PageBusyError("page " + std::to_string(req.page.value) + " busy until " +
                        std::to_string(page.controller.busy_until) + " ns");
  }

  Nanoseconds duration = 0.0;
  if (req.kind == RequestKind::kAggregate) {
    duration = execute_aggregate(page, std::get<fabric::AggSpec>(req.payload), req.engine, start);
  } else {
    duration = execute_logic(page, std::get<LogicSequence>(req.payload), start);
  }
  page.controller.busy_until = start + duration;
  ++page.controller.issued_ops;
  return start + duration;
}

Line PimDevice::host_read_line(PageId page, std::uint32_t row, std::uint32_t granule_index,
                               HostContext& ctx) {
  Page& p = page_at(page);
  const std::uint32_t col = granule_index * kGranuleBits;
  if (row >= geometry_.xbar_rows || col + kGranuleBits > geometry_.xbar_cols) {
    throw OutOfRangeError("line (row " + std::to_string(row) + ", granule " +
                          std::to_string(granule_index) + ") out of range");
  }
  Line line;
  line.reserve(p.crossbars.size());
  for (auto& xb : p.crossbars) line.push_back(xb.read_granule(row, col));
  ledger_.charge(EventKind::kLineRead, geometry_.line_bits, ctx.now, params().t_host_read);
  ctx.now += params().t_host_read;
  return line;
}

void PimDevice::host_write_line(PageId page, std::uint32_t row, std::uint32_t granule_index,
                                const Line& line, HostContext& ctx) {
  Page& p = page_at(page);
  const std::uint32_t col = granule_index * kGranuleBits;
  if (row >= geometry_.xbar_rows || col + kGranuleBits > geometry_.xbar_cols) {
    throw OutOfRangeError("line (row " + std::to_string(row) + ", granule " +
                          std::to_string(granule_index) + ") out of range");
  }
  if (line.size() != p.crossbars.size()) throw InvalidArgumentError("line width does not match page");
  std::uint64_t writes = 0;
  for (std::size_t c = 0; c < line.size(); ++c) writes += p.crossbars[c].write_row_bits(row, col, line[c], kGranuleBits);
  ledger_.note_cell_writes(writes);
  ledger_.charge(EventKind::kLineWrite, geometry_.line_bits, ctx.now, params().t_host_write);
  ctx.now += params().t_host_write;
}

void PimDevice::transfer_bitvector(PageId src, std::uint32_t src_col, PageId dst, std::uint32_t dst_col,
                                   HostContext& ctx) {
  Page& s = page_at(src);
  Page& d = page_at(dst);
  if (s.crossbars.size() != d.crossbars.size()) throw InvalidArgumentError("misaligned page geometries");
  if (src_col >= geometry_.xbar_cols || dst_col - dst_col % kGranuleBits + kGranuleBits > geometry_.xbar_cols) {
    throw OutOfRangeError("bit-vector transfer column out of range");
  }
  std::uint64_t writes = 0;
  for (std::size_t c = 0; c < s.crossbars.size(); ++c) {
    writes += d.crossbars[c].receive_bit_column(s.crossbars[c], src_col, dst_col);
  }
  ledger_.note_cell_writes(writes);

  const double rows = geometry_.xbar_rows;
  const Nanoseconds read_time = rows * params().t_host_read;
  const Nanoseconds write_time = rows * params().t_host_write;
  ledger_.charge(EventKind::kLineRead, rows * geometry_.line_bits, ctx.now, read_time);
  ledger_.charge(EventKind::kLineWrite, rows * geometry_.line_bits, ctx.now + read_time, write_time);
  ctx.now += read_time + write_time;
}

std::vector<std::vector<std::uint64_t>> PimDevice::host_read_bit_column(PageId page, std::uint32_t col,
                                                                        HostContext& ctx) {
  const Page& p = page_at(page);
  std::vector<std::vector<std::uint64_t>> out;
  out.reserve(p.crossbars.size());
  for (const auto& xb : p.crossbars) {
    auto words = xb.column_words(col);
    out.emplace_back(words.begin(), words.end());
  }
  charge_line_reads(page, geometry_.xbar_rows, ctx);
  return out;
}

void PimDevice::charge_line_reads(PageId page, std::uint64_t lines, HostContext& ctx) {
  page_at(page);
  const Nanoseconds duration = static_cast<double>(lines) * params().t_host_read;
  ledger_.charge(EventKind::kLineRead, static_cast<double>(lines) * geometry_.line_bits, ctx.now, duration);
  ctx.now += duration;
}

std::uint64_t PimDevice::max_row_writes() const {
  std::uint64_t m = 0;
  for (const auto& p : pages_) {
    for (const auto& xb : p.crossbars) m = std::max(m, xb.max_row_writes());
  }
  return m;
}

std::uint64_t PimDevice::total_row_writes() const {
  std::uint64_t t = 0;
  for (const auto& p : pages_) {
    for (const auto& xb : p.crossbars) t += xb.total_writes();
  }
  return t;
}

void PimDevice::reset_stats() {
  ledger_.clear();
  for (auto& p : pages_) {
    for (auto& xb : p.crossbars) xb.reset_wear();
    p.controller.busy_until = 0.0;
    p.controller.issued_ops = 0;
  }
}

}  // namespace pimolap::device
