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

#include "pimolap/crossbar.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <string>

#include "pimolap/errors.hpp"

namespace pimolap::fabric {

const char* to_string(LogicOp op) {
  switch (op) {
    case LogicOp::kNor: return "NOR";
    case LogicOp::kNot: return "NOT";
    case LogicOp::kOr: return "OR";
    case LogicOp::kAnd: return "AND";
    case LogicOp::kXor: return "XOR";
    case LogicOp::kAndNot: return "AND_NOT";
  }
  return "?";
}

const char* to_string(AggOp op) {
  switch (op) {
    case AggOp::kSum: return "SUM";
    case AggOp::kMin: return "MIN";
    case AggOp::kMax: return "MAX";
  }
  return "?";
}

std::uint32_t LogicCosts::cycles(LogicOp op) const {
  switch (op) {
    case LogicOp::kNor: return nor;
    case LogicOp::kNot: return not_;
    case LogicOp::kOr: return or_;
    case LogicOp::kAnd: return and_;
    case LogicOp::kXor: return xor_;
    case LogicOp::kAndNot: return and_not;
  }
  return 0;
}

std::uint64_t agg_identity(AggOp op, std::uint32_t width_bits) {
  switch (op) {
    case AggOp::kSum: return 0;
    case AggOp::kMax: return 0;
    case AggOp::kMin:
      return width_bits >= 64 ? std::numeric_limits<std::uint64_t>::max()
                              : (std::uint64_t{1} << width_bits) - 1;
  }
  return 0;
}

void agg_combine(AggOp op, AggResult& acc, std::uint64_t value) {
  switch (op) {
    case AggOp::kSum: acc.value += value; break;
    case AggOp::kMin: acc.value = acc.empty ? value : std::min(acc.value, value); break;
    case AggOp::kMax: acc.value = acc.empty ? value : std::max(acc.value, value); break;
  }
  acc.empty = false;
}

void agg_merge(AggOp op, AggResult& acc, const AggResult& partial) {
  if (partial.empty) return;
  agg_combine(op, acc, partial.value);
}

namespace {

std::uint64_t low_mask(std::uint32_t width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

}  // namespace

Crossbar::Crossbar(std::uint32_t rows, std::uint32_t cols, WritePolicy policy)
    : rows_(rows), cols_(cols), policy_(policy), words_per_col_((rows + 63) / 64) {
  if (rows == 0 || cols == 0) throw InvalidArgumentError("crossbar must have rows and columns");
  cells_.assign(std::size_t{cols_} * words_per_col_, 0);
  write_counts_.assign(rows_, 0);
}

void Crossbar::check_row(std::uint32_t row) const {
  if (row >= rows_) {
    throw OutOfRangeError("row " + std::to_string(row) + " outside [0," + std::to_string(rows_) + ")");
  }
}

void Crossbar::check_col(std::uint32_t col) const {
  if (col >= cols_) {
    throw OutOfRangeError("column " + std::to_string(col) + " outside [0," + std::to_string(cols_) + ")");
  }
}

std::uint64_t Crossbar::tail_mask() const {
  const std::uint32_t rem = rows_ % 64;
  return rem == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << rem) - 1;
}

bool Crossbar::bit(std::uint32_t row, std::uint32_t col) const {
  check_row(row);
  check_col(col);
  return (col_ptr(col)[row / 64] >> (row % 64)) & 1U;
}

std::uint64_t Crossbar::store_column(std::uint32_t col, const std::vector<std::uint64_t>& next) {
  std::uint64_t* words = col_ptr(col);
  std::uint64_t charged = 0;
  for (std::uint32_t w = 0; w < words_per_col_; ++w) {
    std::uint64_t touched = policy_ == WritePolicy::kToggled ? (words[w] ^ next[w])
                                                             : (w + 1 == words_per_col_ ? tail_mask() : ~std::uint64_t{0});
    charged += static_cast<std::uint64_t>(std::popcount(touched));
    while (touched != 0) {
      const int b = std::countr_zero(touched);
      ++write_counts_[std::size_t{w} * 64 + static_cast<std::uint32_t>(b)];
      touched &= touched - 1;
    }
    words[w] = next[w];
  }
  return charged;
}

std::uint64_t Crossbar::bulk_logic(LogicOp op, std::span<const std::uint32_t> in_cols,
                                   std::uint32_t out_col) {
  check_col(out_col);
  for (auto c : in_cols) check_col(c);
  if (in_cols.empty()) throw InvalidArgumentError(std::string(to_string(op)) + " needs at least one input");
  if (op == LogicOp::kNot && in_cols.size() != 1) throw InvalidArgumentError("NOT takes exactly one input");
  if (op == LogicOp::kAndNot && in_cols.size() != 2) throw InvalidArgumentError("AND_NOT takes exactly two inputs");

  const bool in_place_ok = op == LogicOp::kOr || op == LogicOp::kAnd || op == LogicOp::kAndNot;
  for (std::size_t i = 0; i < in_cols.size(); ++i) {
    if (in_cols[i] == out_col && !(in_place_ok && i == 0)) {
      throw InvalidArgumentError(std::string(to_string(op)) + " output column " +
                                 std::to_string(out_col) + " aliases an input");
    }
  }

  std::vector<std::uint64_t> next(words_per_col_);
  for (std::uint32_t w = 0; w < words_per_col_; ++w) {
    std::uint64_t acc = col_ptr(in_cols[0])[w];
    switch (op) {
      case LogicOp::kNot: acc = ~acc; break;
      case LogicOp::kAndNot: acc &= ~col_ptr(in_cols[1])[w]; break;
      case LogicOp::kNor:
      case LogicOp::kOr:
        for (std::size_t i = 1; i < in_cols.size(); ++i) acc |= col_ptr(in_cols[i])[w];
        if (op == LogicOp::kNor) acc = ~acc;
        break;
      case LogicOp::kAnd:
        for (std::size_t i = 1; i < in_cols.size(); ++i) acc &= col_ptr(in_cols[i])[w];
        break;
      case LogicOp::kXor:
        for (std::size_t i = 1; i < in_cols.size(); ++i) acc ^= col_ptr(in_cols[i])[w];
        break;
    }
    if (w + 1 == words_per_col_) acc &= tail_mask();
    next[w] = acc;
  }
  return store_column(out_col, next);
}

std::uint64_t Crossbar::peek_bits(std::uint32_t row, std::uint32_t col_start,
                                  std::uint32_t width) const {
  check_row(row);
  if (width > 64) throw InvalidArgumentError("at most 64 bits per access");
  if (col_start + width > cols_) {
    throw OutOfRangeError("bit span [" + std::to_string(col_start) + "," +
                          std::to_string(col_start + width) + ") exceeds " + std::to_string(cols_) +
                          " columns");
  }
  const std::uint32_t word = row / 64;
  const std::uint32_t shift = row % 64;
  std::uint64_t value = 0;
  for (std::uint32_t i = 0; i < width; ++i) {
    value |= ((col_ptr(col_start + i)[word] >> shift) & 1U) << i;
  }
  return value;
}

std::uint16_t Crossbar::read_granule(std::uint32_t row, std::uint32_t col_start) {
  const auto value = static_cast<std::uint16_t>(peek_bits(row, col_start, kGranuleBits));
  ++read_count_;
  return value;
}

std::uint64_t Crossbar::write_row_bits(std::uint32_t row, std::uint32_t col_start,
                                       std::uint64_t value, std::uint32_t width) {
  check_row(row);
  if (width > 64) throw InvalidArgumentError("at most 64 bits per access");
  if (col_start + width > cols_) {
    throw OutOfRangeError("bit span [" + std::to_string(col_start) + "," +
                          std::to_string(col_start + width) + ") exceeds " + std::to_string(cols_) +
                          " columns");
  }
  const std::uint32_t word = row / 64;
  const std::uint64_t bitmask = std::uint64_t{1} << (row % 64);
  std::uint64_t charged = 0;
  for (std::uint32_t i = 0; i < width; ++i) {
    std::uint64_t& w = col_ptr(col_start + i)[word];
    const bool want = (value >> i) & 1U;
    const bool have = (w & bitmask) != 0;
    if (want != have || policy_ == WritePolicy::kAddressed) ++charged;
    if (want) {
      w |= bitmask;
    } else {
      w &= ~bitmask;
    }
  }
  write_counts_[row] += charged;
  return charged;
}

void Crossbar::check(const AggSpec& spec) const {
  if (spec.value_width_bits == 0 || spec.value_width_bits % kGranuleBits != 0 || spec.value_width_bits > 64) {
    throw InvalidArgumentError("aggregated value width must be a non-zero multiple of 16 up to 64 bits");
  }
  if (spec.src.width != spec.value_width_bits) {
    throw InvalidArgumentError("source range width differs from value width");
  }
  if (spec.dst.width == 0 || spec.dst.width % kGranuleBits != 0 || spec.dst.width > 128 ||
      spec.dst.width <= spec.value_width_bits) {
    throw InvalidArgumentError("destination must be whole granules wider than the value (<= 128 bits)");
  }
  if (spec.src.end() > cols_ || spec.dst.end() > cols_) throw OutOfRangeError("aggregation range outside crossbar");
  if (spec.src.overlaps(spec.dst)) throw InvalidArgumentError("aggregation source and destination overlap");
  if (spec.src.start % kGranuleBits != 0 || spec.dst.start % kGranuleBits != 0) {
    throw InvalidArgumentError("aggregation ranges must be granule aligned");
  }
  check_col(spec.mask_col);
  check_row(spec.result_row);
}

AggResult Crossbar::aggregate(const AggSpec& spec) {
  check(spec);
  const std::uint32_t granules = spec.value_granules();
  AggResult acc{agg_identity(spec.op, spec.value_width_bits), true};
  const std::uint64_t* mask = col_ptr(spec.mask_col);
  for (std::uint32_t w = 0; w < words_per_col_; ++w) {
    std::uint64_t bits = mask[w];
    while (bits != 0) {
      const auto row = w * 64 + static_cast<std::uint32_t>(std::countr_zero(bits));
      bits &= bits - 1;
      std::uint64_t value = 0;
      for (std::uint32_t g = 0; g < granules; ++g) {
        value |= peek_bits(row, spec.src.start + g * kGranuleBits, kGranuleBits) << (g * kGranuleBits);
      }
      agg_combine(spec.op, acc, value);
    }
  }
  // Data-independent scan: every row's value granules are read.
  read_count_ += std::uint64_t{rows_} * granules;

  // Value in the low bits, non-empty flag in the top bit of dst.
  const std::uint32_t flag_bit = spec.dst.width - 1;
  for (std::uint32_t offset = 0; offset < spec.dst.width; offset += 64) {
    const std::uint32_t width = std::min<std::uint32_t>(64, spec.dst.width - offset);
    std::uint64_t chunk = offset == 0 ? acc.value & low_mask(std::min(flag_bit, 64U)) : 0;
    if (!acc.empty && flag_bit >= offset && flag_bit < offset + width) {
      chunk |= std::uint64_t{1} << (flag_bit - offset);
    }
    write_row_bits(spec.result_row, spec.dst.start + offset, chunk, width);
  }
  return acc;
}

std::uint64_t Crossbar::receive_bit_column(const Crossbar& src, std::uint32_t src_col,
                                           std::uint32_t dst_col) {
  src.check_col(src_col);
  check_col(dst_col);
  if (src.rows_ != rows_) throw InvalidArgumentError("bit-vector transfer between crossbars of different height");
  const std::uint32_t granule_start = dst_col - dst_col % kGranuleBits;
  if (granule_start + kGranuleBits > cols_) throw OutOfRangeError("destination granule exceeds crossbar");
  std::uint64_t charged = 0;
  std::vector<std::uint64_t> zero(words_per_col_, 0);
  for (std::uint32_t c = granule_start; c < granule_start + kGranuleBits; ++c) {
    if (c == dst_col) {
      std::vector<std::uint64_t> next(src.col_ptr(src_col), src.col_ptr(src_col) + words_per_col_);
      charged += store_column(c, next);
    } else {
      charged += store_column(c, zero);
    }
  }
  return charged;
}

void Crossbar::add_uniform_row_writes(std::uint64_t writes) {
  for (auto& w : write_counts_) w += writes;
}

std::span<const std::uint64_t> Crossbar::column_words(std::uint32_t col) const {
  check_col(col);
  return {col_ptr(col), words_per_col_};
}

std::uint64_t Crossbar::max_row_writes() const {
  return *std::max_element(write_counts_.begin(), write_counts_.end());
}

std::uint64_t Crossbar::total_writes() const {
  std::uint64_t total = 0;
  for (auto w : write_counts_) total += w;
  return total;
}

void Crossbar::reset_wear() {
  std::fill(write_counts_.begin(), write_counts_.end(), 0);
  read_count_ = 0;
}

std::uint64_t Crossbar::matrix_hash() const {
  // FNV-1a over the cell words.
  std::uint64_t h = 1469598103934665603ULL;
  for (auto w : cells_) {
    for (int b = 0; b < 8; ++b) {
      h ^= (w >> (8 * b)) & 0xFFU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace pimolap::fabric
