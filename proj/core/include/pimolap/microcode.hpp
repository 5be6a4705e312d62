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
#include <variant>
#include <vector>

#include "pimolap/crossbar.hpp"
#include "pimolap/device.hpp"
#include "pimolap/layout.hpp"
#include "pimolap/predicate.hpp"

namespace pimolap::microcode {

/// Declared cycle cost of compiled predicates. EQ over w bits costs
/// eq_per_bit * w + eq_base, an ordered comparison cmp_per_bit * w +
/// cmp_base; boolean combination uses the logic-op table.
struct CycleTable {
  fabric::LogicCosts ops;
  std::uint32_t eq_per_bit = 2;
  std::uint32_t eq_base = 1;
  std::uint32_t cmp_per_bit = 3;
  std::uint32_t cmp_base = 2;

  std::uint64_t eq(std::uint32_t w) const { return std::uint64_t{eq_per_bit} * w + eq_base; }
  std::uint64_t cmp(std::uint32_t w) const { return std::uint64_t{cmp_per_bit} * w + cmp_base; }
  std::uint64_t ne(std::uint32_t w) const { return eq(w) + ops.not_; }
  std::uint64_t between(std::uint32_t w) const { return 2 * cmp(w) + ops.and_; }
  std::uint64_t in_list(std::uint32_t w, std::size_t m) const;
  std::uint64_t combine(fabric::LogicOp op, std::size_t m) const;
};

/// Microcode run on every page of one partition.
struct PartitionStage {
  std::uint32_t partition = 0;
  device::LogicSequence seq;
};

/// Host copy of a bit column from one partition's pages to the aligned pages
/// of another.
struct BitTransfer {
  std::uint32_t from_partition = 0;
  std::uint32_t src_col = 0;
  std::uint32_t to_partition = 0;
  std::uint32_t dst_col = 0;
};

using FilterStep = std::variant<PartitionStage, BitTransfer>;

struct FilterProgram {
  std::vector<FilterStep> steps;
  std::uint32_t result_partition = 0;
  std::uint32_t result_col = 0;

  std::uint64_t cycles() const;
  std::size_t transfers() const;
  std::size_t op_count() const;
};

/// Compiles `pred` (bound) so that column `result_col` of partition
/// `result_partition` holds 1 exactly on rows satisfying it. Subtrees over
/// another partition are evaluated there and moved through the destination
/// partition's transfer granule. TRUE and FALSE are relative to the valid
/// bit. Throws InvalidArgumentError for unbound or cross-partition
/// attribute comparisons and CapacityError when scratch columns run out.
FilterProgram compile_filter(const Predicate& pred, const Placement& placement, std::uint32_t result_partition,
                             std::uint32_t result_col, const CycleTable& table = {});

struct MuxSpec {
  fabric::ColumnRange value_cols;
  std::uint64_t immediate = 0;
  std::uint32_t select_col = 0;
  std::uint32_t scratch_col = 0;
};

/// v_i <- c_i on rows whose select bit is set: NOT(s) once, then an in-place
/// OR with s for every 1 bit of c and an in-place AND with NOT(s) for every 0
/// bit. n + 1 bulk operations.
device::LogicSequence compile_mux(const MuxSpec& spec, const fabric::LogicCosts& costs = {});

}  // namespace pimolap::microcode
