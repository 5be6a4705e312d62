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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pimolap {

enum class AttrKind { kInteger, kDate, kCategorical };

const char* to_string(AttrKind kind);
AttrKind attr_kind_from_string(std::string_view text);

/// Days since 1992-01-01 for an ISO date "YYYY-MM-DD".
std::uint64_t date_to_day(std::string_view iso);
std::string day_to_date(std::uint64_t day);

/// One column of the pre-joined relation.
///
/// `domain` lists every code the attribute may take (sorted); it bounds the
/// number of potential subgroups. `parent_codes`, when `parent` is set, maps
/// domain[i] to its code in the parent attribute.
struct Attribute {
  std::string name;
  std::uint32_t width_bits = 0;
  AttrKind kind = AttrKind::kInteger;
  std::string origin = "fact";
  std::vector<std::string> dictionary;
  std::vector<std::uint64_t> domain;
  std::string parent;
  std::vector<std::uint64_t> parent_codes;

  std::uint32_t granules() const { return (width_bits + 15) / 16; }
  std::uint32_t slot_bits() const { return granules() * 16; }
  bool is_fact() const { return origin == "fact"; }
  std::uint64_t max_code() const;

  /// Code of a string literal: dictionary entry, ISO date or decimal integer.
  std::uint64_t encode(std::string_view literal) const;
  std::uint64_t encode(std::uint64_t literal) const;
  std::string decode(std::uint64_t code) const;

  /// Code of the parent attribute for `code`, if known.
  std::optional<std::uint64_t> parent_of(std::uint64_t code) const;
};

struct Schema {
  std::vector<Attribute> attributes;

  std::optional<std::size_t> find(std::string_view name) const;
  const Attribute& at(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  std::uint32_t total_width() const;
  std::uint32_t total_slot_bits() const;

  /// Throws FormatError on duplicate names, zero widths, codes that do not
  /// fit, or dangling parents.
  void validate() const;
};

/// Pre-joined relation held column-wise in host memory.
struct Relation {
  Schema schema;
  std::vector<std::vector<std::uint64_t>> columns;

  std::uint64_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const std::vector<std::uint64_t>& column(std::string_view name) const;
  std::vector<std::uint64_t>& column(std::string_view name);
  void validate() const;
};

}  // namespace pimolap
