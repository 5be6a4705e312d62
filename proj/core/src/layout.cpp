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

#include "pimolap/layout.hpp"

#include <algorithm>
#include <string>

#include "pimolap/errors.hpp"

namespace pimolap {

using fabric::kGranuleBits;

const char* to_string(LayoutMode mode) { return mode == LayoutMode::kOneXb ? "one-xb" : "two-xb"; }

LayoutMode layout_mode_from_string(std::string_view text) {
  if (text == "one-xb") return LayoutMode::kOneXb;
  if (text == "two-xb") return LayoutMode::kTwoXb;
  throw InvalidArgumentError("unknown layout '" + std::string(text) + "' (one-xb|two-xb)");
}

const AttributePlacement& Placement::at(std::string_view name) const {
  return attrs[schema.index_of(name)];
}

bool Placement::operator==(const Placement& other) const {
  if (mode != other.mode || cols != other.cols || attrs.size() != other.attrs.size() ||
      work.size() != other.work.size()) {
    return false;
  }
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (attrs[i].partition != other.attrs[i].partition || attrs[i].cols != other.attrs[i].cols) return false;
  }
  for (std::size_t p = 0; p < work.size(); ++p) {
    const auto& a = work[p];
    const auto& b = other.work[p];
    if (a.filter != b.filter || a.valid != b.valid || a.transfer != b.transfer || a.agg_dst != b.agg_dst ||
        a.handled != b.handled || a.subgroup != b.subgroup || a.mask != b.mask || a.hostsel != b.hostsel ||
        a.notselect != b.notselect || a.temps != b.temps) {
      return false;
    }
  }
  return true;
}

Placement place(const Schema& schema, LayoutMode mode, std::uint32_t cols) {
  schema.validate();
  if (cols % kGranuleBits != 0) throw InvalidArgumentError("row width must be whole granules");
  Placement pl;
  pl.mode = mode;
  pl.schema = schema;
  pl.cols = cols;
  const std::uint32_t parts = mode == LayoutMode::kOneXb ? 1 : 2;
  std::vector<std::uint32_t> cursor(parts, 0);
  std::vector<std::uint32_t> widest(parts, 0);
  for (const auto& a : schema.attributes) {
    const std::uint32_t p = (mode == LayoutMode::kTwoXb && !a.is_fact()) ? 1 : 0;
    pl.attrs.push_back({p, {cursor[p], a.width_bits}});
    cursor[p] += a.slot_bits();
    widest[p] = std::max(widest[p], a.slot_bits());
  }
  for (std::uint32_t p = 0; p < parts; ++p) {
    WorkColumns w;
    std::uint32_t c = cursor[p];
    w.filter = c;
    w.valid = c + 1;
    c += kGranuleBits;
    w.transfer = c;
    c += kGranuleBits;
    const std::uint32_t dst = widest[p] == 0 ? 0 : widest[p] + kGranuleBits;
    w.agg_dst = {c, dst};
    c += dst;
    const std::uint32_t required = c + 5 + kMinTemps;
    if (required > cols) {
      throw CapacityError(std::string(to_string(mode)) + " partition " + std::to_string(p) + " needs " +
                          std::to_string(required) + " columns (" + std::to_string(cursor[p]) +
                          " data + " + std::to_string(c - cursor[p]) + " work + " +
                          std::to_string(5 + kMinTemps) + " scratch) but a row has " + std::to_string(cols));
    }
    w.handled = c++;
    w.subgroup = c++;
    w.mask = c++;
    w.hostsel = c++;
    w.notselect = c++;
    for (; c < cols; ++c) w.temps.push_back(c);
    pl.work.push_back(std::move(w));
  }
  return pl;
}

std::uint64_t LoadedRelation::records_on_page(std::uint64_t ordinal, const device::DeviceGeometry& g) const {
  const auto rpp = g.records_per_page();
  const auto first = ordinal * rpp;
  if (first >= records) return 0;
  return std::min<std::uint64_t>(rpp, records - first);
}

RecordAddress address_of(std::uint64_t record, const device::DeviceGeometry& g) {
  const auto rpp = g.records_per_page();
  const auto in_page = record % rpp;
  return {record / rpp, static_cast<std::uint32_t>(in_page / g.xbar_rows),
          static_cast<std::uint32_t>(in_page % g.xbar_rows)};
}

LoadedRelation load(const Relation& relation, const Placement& placement, device::PimDevice& dev) {
  relation.validate();
  if (relation.schema.attributes.size() != placement.schema.attributes.size()) {
    throw InvalidArgumentError("relation does not match placement schema");
  }
  const auto& g = dev.geometry();
  if (placement.cols != g.xbar_cols) throw InvalidArgumentError("placement row width differs from device");
  const std::uint64_t n = relation.rows();
  if (n == 0) throw InvalidArgumentError("cannot load an empty relation");
  const std::uint64_t m = (n + g.records_per_page() - 1) / g.records_per_page();
  if (m * placement.partitions() + dev.page_count() > g.max_pages()) {
    throw CapacityError("relation needs " + std::to_string(m * placement.partitions()) +
                        " pages, module holds " + std::to_string(g.max_pages()));
  }

  LoadedRelation rel;
  rel.placement = placement;
  rel.records = n;
  rel.pages.resize(placement.partitions());
  for (std::uint64_t i = 0; i < m; ++i) {
    for (auto& part : rel.pages) part.push_back(dev.allocate_page());
  }

  for (std::uint64_t j = 0; j < n; ++j) {
    const auto addr = address_of(j, g);
    for (std::uint32_t p = 0; p < placement.partitions(); ++p) {
      dev.crossbar(rel.pages[p][addr.page], addr.crossbar).write_row_bits(addr.row, placement.work[p].valid, 1, 1);
    }
    for (std::size_t a = 0; a < placement.attrs.size(); ++a) {
      const auto& ap = placement.attrs[a];
      dev.crossbar(rel.pages[ap.partition][addr.page], addr.crossbar)
          .write_row_bits(addr.row, ap.cols.start, relation.columns[a][j], ap.cols.width);
    }
  }
  dev.reset_stats();
  return rel;
}

std::uint64_t peek_value(const LoadedRelation& rel, const device::PimDevice& dev, std::string_view attribute,
                         std::uint64_t record) {
  if (record >= rel.records) throw OutOfRangeError("record " + std::to_string(record) + " not loaded");
  const auto& ap = rel.placement.at(attribute);
  const auto addr = address_of(record, dev.geometry());
  return dev.crossbar(rel.pages[ap.partition][addr.page], addr.crossbar)
      .peek_bits(addr.row, ap.cols.start, ap.cols.width);
}

}  // namespace pimolap
