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
#include <span>
#include <vector>

namespace pimolap::fabric {

/// Width of a single crossbar read or write, in bits.
inline constexpr std::uint32_t kGranuleBits = 16;

/// Bulk column-wise logic. NOR and NOT are native; the others are composed
/// microcode whose cycle cost comes from LogicCosts.
enum class LogicOp { kNor, kNot, kOr, kAnd, kXor, kAndNot };

const char* to_string(LogicOp op);

/// Cycle cost of each bulk logic operation.
struct LogicCosts {
  std::uint32_t nor = 1;
  std::uint32_t not_ = 1;
  std::uint32_t and_ = 3;
  std::uint32_t or_ = 2;
  std::uint32_t xor_ = 5;
  std::uint32_t and_not = 2;

  std::uint32_t cycles(LogicOp op) const;
};

/// How write_counts are incremented: by cells whose value changed, or by
/// every cell addressed by the operation.
enum class WritePolicy { kToggled, kAddressed };

enum class AggOp { kSum, kMin, kMax };

const char* to_string(AggOp op);

struct ColumnRange {
  std::uint32_t start = 0;
  std::uint32_t width = 0;

  std::uint32_t end() const { return start + width; }
  bool overlaps(const ColumnRange& other) const {
    return start < other.end() && other.start < end();
  }
  bool operator==(const ColumnRange&) const = default;
};

/// Request to the peripheral aggregation ALU.
///
/// The result is written to `dst` of `result_row`. Its low
/// `dst.width - 1` bits hold the value and the top bit is set when at least
/// one row was selected, so the host can tell an empty SUM from a zero one.
struct AggSpec {
  AggOp op = AggOp::kSum;
  ColumnRange src;
  ColumnRange dst;
  std::uint32_t value_width_bits = 0;
  std::uint32_t mask_col = 0;
  std::uint32_t result_row = 0;

  std::uint32_t value_granules() const { return value_width_bits / kGranuleBits; }
  std::uint32_t dst_granules() const { return dst.width / kGranuleBits; }
};

struct AggResult {
  std::uint64_t value = 0;
  bool empty = true;

  bool operator==(const AggResult&) const = default;
};

/// Identity element of `op` (type extremes for MIN/MAX over `width` bits).
std::uint64_t agg_identity(AggOp op, std::uint32_t width_bits);

/// Folds `value` into `acc`.
void agg_combine(AggOp op, AggResult& acc, std::uint64_t value);

/// Folds a partial result into `acc`; empty partials are ignored.
void agg_merge(AggOp op, AggResult& acc, const AggResult& partial);

/// A rows x cols bit matrix with bulk column logic, granule-wide access and a
/// peripheral SUM/MIN/MAX unit. Storage is column-major so that bulk logic is
/// a word-parallel loop.
///
/// Single owner; a crossbar is never mutated concurrently.
class Crossbar {
 public:
  explicit Crossbar(std::uint32_t rows = 1024, std::uint32_t cols = 512,
                    WritePolicy policy = WritePolicy::kToggled);

  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }
  WritePolicy write_policy() const { return policy_; }

  bool bit(std::uint32_t row, std::uint32_t col) const;

  /// Executes `op` over every row. In-place forms are allowed only for OR,
  /// AND and AND_NOT with `out_col == in_cols[0]`, which behave as
  /// conditional set/reset of the destination. Returns the number of cell
  /// writes charged under the write policy.
  std::uint64_t bulk_logic(LogicOp op, std::span<const std::uint32_t> in_cols,
                           std::uint32_t out_col);

  std::uint16_t read_granule(std::uint32_t row, std::uint32_t col_start);

  /// Writes the low `width` bits of `value` starting at `col_start`
  /// (bit i to column col_start + i). Returns cell writes charged.
  std::uint64_t write_row_bits(std::uint32_t row, std::uint32_t col_start,
                               std::uint64_t value, std::uint32_t width);

  /// Reads `width` bits without tallying a read event.
  std::uint64_t peek_bits(std::uint32_t row, std::uint32_t col_start,
                          std::uint32_t width) const;

  /// Runs the aggregation ALU. Every row is scanned (value_granules reads per
  /// row), arithmetic is applied only to rows whose mask bit is set.
  AggResult aggregate(const AggSpec& spec);

  /// Validates `spec` against this crossbar's geometry.
  void check(const AggSpec& spec) const;

  /// Overwrites column `dst_col` with column `src_col` of `src`, and zeroes
  /// the remaining columns of dst_col's granule. This is the cell effect of a
  /// host line write that carries one bit per record.
  std::uint64_t receive_bit_column(const Crossbar& src, std::uint32_t src_col,
                                   std::uint32_t dst_col);

  /// Adds `writes` to every row's tally; used for modelled (not functionally
  /// executed) operations.
  void add_uniform_row_writes(std::uint64_t writes);

  std::span<const std::uint64_t> column_words(std::uint32_t col) const;
  std::span<const std::uint64_t> write_counts() const { return write_counts_; }
  std::uint64_t read_count() const { return read_count_; }
  std::uint64_t max_row_writes() const;
  std::uint64_t total_writes() const;
  void reset_wear();

  std::uint64_t matrix_hash() const;
  bool same_cells(const Crossbar& other) const { return cells_ == other.cells_; }

 private:
  std::uint32_t words_per_col() const { return words_per_col_; }
  std::uint64_t* col_ptr(std::uint32_t col) { return cells_.data() + std::size_t{col} * words_per_col_; }
  const std::uint64_t* col_ptr(std::uint32_t col) const {
    return cells_.data() + std::size_t{col} * words_per_col_;
  }
  void check_row(std::uint32_t row) const;
  void check_col(std::uint32_t col) const;
  std::uint64_t store_column(std::uint32_t col, const std::vector<std::uint64_t>& next);
  std::uint64_t tail_mask() const;

  std::uint32_t rows_;
  std::uint32_t cols_;
  WritePolicy policy_;
  std::uint32_t words_per_col_;
  std::vector<std::uint64_t> cells_;
  std::vector<std::uint64_t> write_counts_;
  std::uint64_t read_count_ = 0;
};

}  // namespace pimolap::fabric
