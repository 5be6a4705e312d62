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
#include <string_view>
#include <vector>

#include "pimolap/crossbar.hpp"
#include "pimolap/device.hpp"
#include "pimolap/schema.hpp"

namespace pimolap {

enum class LayoutMode { kOneXb, kTwoXb };

const char* to_string(LayoutMode mode);
LayoutMode layout_mode_from_string(std::string_view text);

struct AttributePlacement {
  std::uint32_t partition = 0;
  fabric::ColumnRange cols;
};

/// Work area of one partition. The filter granule holds the filter result in
/// its first column and the record-valid bit in the second.
struct WorkColumns {
  std::uint32_t filter = 0;
  std::uint32_t valid = 0;
  std::uint32_t transfer = 0;
  fabric::ColumnRange agg_dst;
  std::uint32_t handled = 0;
  std::uint32_t subgroup = 0;
  std::uint32_t mask = 0;
  std::uint32_t hostsel = 0;
  std::uint32_t notselect = 0;
  std::vector<std::uint32_t> temps;
};

inline constexpr std::uint32_t kMinTemps = 6;

struct Placement {
  LayoutMode mode = LayoutMode::kOneXb;
  Schema schema;
  std::uint32_t cols = 512;
  std::vector<AttributePlacement> attrs;
  std::vector<WorkColumns> work;

  std::uint32_t partitions() const { return static_cast<std::uint32_t>(work.size()); }
  const AttributePlacement& at(std::string_view name) const;
  /// Partition holding the filter result used for aggregation.
  std::uint32_t home() const { return 0; }
  bool operator==(const Placement& other) const;
};

/// Packs attributes in declaration order at granule boundaries, then the work
/// columns. Throws CapacityError naming the required width on overflow.
Placement place(const Schema& schema, LayoutMode mode, std::uint32_t cols = 512);

/// A relation resident on a device. pages[p][i] is page ordinal i of
/// partition p; record j sits on page j / records_per_page, crossbar
/// (j mod records_per_page) / rows, row j mod rows in every partition.
struct LoadedRelation {
  Placement placement;
  std::uint64_t records = 0;
  std::vector<std::vector<device::PageId>> pages;

  std::uint64_t page_count() const { return pages.empty() ? 0 : pages.front().size(); }
  /// Records stored on page ordinal `ordinal`.
  std::uint64_t records_on_page(std::uint64_t ordinal, const device::DeviceGeometry& g) const;
};

struct RecordAddress {
  std::uint64_t page = 0;
  std::uint32_t crossbar = 0;
  std::uint32_t row = 0;
};

RecordAddress address_of(std::uint64_t record, const device::DeviceGeometry& g);

/// Allocates ceil(N / records_per_page) pages per partition and writes every
/// record, including the valid bits. Wear and ledger are reset afterwards.
LoadedRelation load(const Relation& relation, const Placement& placement, device::PimDevice& dev);

/// Reads an attribute value back from the cells (no cost charged).
std::uint64_t peek_value(const LoadedRelation& rel, const device::PimDevice& dev,
                         std::string_view attribute, std::uint64_t record);

}  // namespace pimolap
