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

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pimolap/crossbar.hpp"
#include "pimolap/ledger.hpp"

namespace pimolap::device {

/// Module organisation. Derived quantities follow from the crossbar shape and
/// the page size.
struct DeviceGeometry {
  std::uint32_t chips = 8;
  std::uint64_t page_bytes = 2ULL << 20;
  std::uint32_t xbar_rows = 1024;
  std::uint32_t xbar_cols = 512;
  std::uint32_t line_bits = 512;
  std::uint64_t capacity_bytes = 32ULL << 30;

  std::uint32_t crossbars_per_page() const;
  std::uint32_t crossbars_per_page_per_chip() const;
  std::uint64_t records_per_page() const;
  std::uint32_t granules_per_line_per_chip() const;
  std::uint64_t max_pages() const;

  /// Throws InvalidArgumentError if the derived quantities are inconsistent.
  void validate() const;
};

struct PageId {
  std::uint32_t value = 0;
  auto operator<=>(const PageId&) const = default;
};

struct MicroOp {
  fabric::LogicOp op;
  std::vector<std::uint32_t> in;
  std::uint32_t out;
};

/// A microcode step stream broadcast to every crossbar of a page. `cycles`
/// is the latency the controller charges for the whole sequence.
struct LogicSequence {
  std::vector<MicroOp> ops;
  std::uint64_t cycles = 0;

  /// Appends `op` charging its cost from `costs`.
  void emit(const fabric::LogicCosts& costs, fabric::LogicOp op, std::vector<std::uint32_t> in,
            std::uint32_t out);
  void append(const LogicSequence& other);
  bool empty() const { return ops.empty() && cycles == 0; }
};

enum class RequestKind { kLogicSeq, kAggregate, kMuxUpdate };

/// Aggregation backend: the peripheral ALU, or the pure bulk-bitwise
/// aggregation cost model used as the logic-only baseline.
enum class AggEngine { kAlu, kLogicOnly };

struct PimRequest {
  PageId page;
  RequestKind kind = RequestKind::kLogicSeq;
  std::variant<LogicSequence, fabric::AggSpec> payload;
  AggEngine engine = AggEngine::kAlu;
};

struct PimController {
  PageId page;
  Nanoseconds busy_until = 0.0;
  std::uint64_t issued_ops = 0;
};

/// Per host-thread clock. Requests are dispatched one after another on the
/// thread's command channel; host reads block the thread.
struct HostContext {
  Nanoseconds now = 0.0;
  Nanoseconds channel_free = 0.0;
};

/// One 16-bit granule from each crossbar of a page; element c comes from
/// crossbar c, i.e. bits [16c, 16c + 16) of the host line.
using Line = std::vector<std::uint16_t>;

/// Chips of crossbars organised in pages, one controller per page.
///
/// Pages run concurrently; within a page every crossbar executes the same
/// step stream. All costs go to the device's ledger.
class PimDevice {
 public:
  explicit PimDevice(DeviceGeometry geometry = {}, CostParams params = {},
                     fabric::WritePolicy policy = fabric::WritePolicy::kToggled,
                     fabric::LogicCosts logic_costs = {});

  const DeviceGeometry& geometry() const { return geometry_; }
  const CostParams& params() const { return ledger_.params(); }
  const fabric::LogicCosts& logic_costs() const { return logic_costs_; }
  CostLedger& ledger() { return ledger_; }
  const CostLedger& ledger() const { return ledger_; }

  PageId allocate_page();
  std::size_t page_count() const { return pages_.size(); }

  fabric::Crossbar& crossbar(PageId page, std::uint32_t index);
  const fabric::Crossbar& crossbar(PageId page, std::uint32_t index) const;
  const PimController& controller(PageId page) const;

  /// Dispatches `req` on the context's channel and executes it. Returns the
  /// completion time; the context clock is not advanced (the caller decides
  /// when to wait). Throws PageBusyError if the page is still executing when
  /// the request arrives.
  Nanoseconds submit(const PimRequest& req, HostContext& ctx);

  Line host_read_line(PageId page, std::uint32_t row, std::uint32_t granule_index, HostContext& ctx);
  void host_write_line(PageId page, std::uint32_t row, std::uint32_t granule_index, const Line& line,
                       HostContext& ctx);

  /// Copies bit column `src_col` of every crossbar of `src` into `dst_col` of
  /// the aligned crossbar of `dst`, one host line read and write per row. The
  /// destination granule is owned by the transfer: its other bits are cleared.
  void transfer_bitvector(PageId src, std::uint32_t src_col, PageId dst, std::uint32_t dst_col,
                          HostContext& ctx);

  /// Reads bit column `col` of a page through the host: one line read per
  /// row. Returns the column words of each crossbar.
  std::vector<std::vector<std::uint64_t>> host_read_bit_column(PageId page, std::uint32_t col,
                                                               HostContext& ctx);

  /// Charges `lines` host line reads against `page` and advances the clock.
  /// Callers that fetch many lines in bulk read the cells through the const
  /// crossbar view after paying for them here.
  void charge_line_reads(PageId page, std::uint64_t lines, HostContext& ctx);

  std::uint64_t max_row_writes() const;
  std::uint64_t total_row_writes() const;

  /// Clears the ledger, wear counters and controller state. Cell contents are
  /// kept.
  void reset_stats();

 private:
  struct Page {
    std::vector<fabric::Crossbar> crossbars;
    PimController controller;
  };

  Page& page_at(PageId id);
  const Page& page_at(PageId id) const;
  void validate(const LogicSequence& seq, bool mux) const;
  Nanoseconds execute_logic(Page& page, const LogicSequence& seq, Nanoseconds start);
  Nanoseconds execute_aggregate(Page& page, const fabric::AggSpec& spec, AggEngine engine,
                                Nanoseconds start);

  DeviceGeometry geometry_;
  fabric::WritePolicy policy_;
  fabric::LogicCosts logic_costs_;
  CostLedger ledger_;
  std::vector<Page> pages_;
};

}  // namespace pimolap::device
