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

#include "pimolap/schema.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <set>

#include "pimolap/errors.hpp"

namespace pimolap {

namespace {

constexpr std::chrono::sys_days kEpoch{std::chrono::year{1992} / 1 / 1};

bool parse_u64(std::string_view text, std::uint64_t& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

const char* to_string(AttrKind kind) {
  switch (kind) {
    case AttrKind::kInteger: return "integer";
    case AttrKind::kDate: return "date";
    case AttrKind::kCategorical: return "categorical";
  }
  return "?";
}

AttrKind attr_kind_from_string(std::string_view text) {
  if (text == "integer") return AttrKind::kInteger;
  if (text == "date") return AttrKind::kDate;
  if (text == "categorical") return AttrKind::kCategorical;
  throw FormatError("unknown attribute kind '" + std::string(text) + "'");
}

std::uint64_t date_to_day(std::string_view iso) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const std::string s(iso);
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
    throw InvalidArgumentError("malformed date '" + s + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw InvalidArgumentError("invalid date '" + s + "'");
  const auto days = (std::chrono::sys_days{ymd} - kEpoch).count();
  if (days < 0) throw InvalidArgumentError("date before 1992-01-01: '" + s + "'");
  return static_cast<std::uint64_t>(days);
}

std::string day_to_date(std::uint64_t day) {
  const std::chrono::year_month_day ymd{kEpoch + std::chrono::days{static_cast<long>(day)}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::uint64_t Attribute::max_code() const {
  return width_bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width_bits) - 1;
}

std::uint64_t Attribute::encode(std::uint64_t literal) const {
  if (literal > max_code()) {
    throw InvalidArgumentError("literal " + std::to_string(literal) + " does not fit " + name + " (" +
                               std::to_string(width_bits) + " bits)");
  }
  return literal;
}

std::uint64_t Attribute::encode(std::string_view literal) const {
  if (kind == AttrKind::kCategorical) {
    auto it = std::find(dictionary.begin(), dictionary.end(), literal);
    if (it == dictionary.end()) {
      throw InvalidArgumentError("value '" + std::string(literal) + "' not in dictionary of " + name);
    }
    return static_cast<std::uint64_t>(it - dictionary.begin());
  }
  std::uint64_t v = 0;
  if (parse_u64(literal, v)) return encode(v);
  if (kind == AttrKind::kDate) return encode(date_to_day(literal));
  throw InvalidArgumentError("'" + std::string(literal) + "' is not a value of " + name);
}

std::string Attribute::decode(std::uint64_t code) const {
  if (kind == AttrKind::kCategorical && code < dictionary.size()) return dictionary[code];
  if (kind == AttrKind::kDate) return day_to_date(code);
  return std::to_string(code);
}

std::optional<std::uint64_t> Attribute::parent_of(std::uint64_t code) const {
  if (parent.empty()) return std::nullopt;
  auto it = std::lower_bound(domain.begin(), domain.end(), code);
  if (it == domain.end() || *it != code) return std::nullopt;
  return parent_codes[static_cast<std::size_t>(it - domain.begin())];
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  auto i = find(name);
  if (!i) throw InvalidArgumentError("unknown attribute '" + std::string(name) + "'");
  return *i;
}

const Attribute& Schema::at(std::string_view name) const { return attributes[index_of(name)]; }

std::uint32_t Schema::total_width() const {
  std::uint32_t w = 0;
  for (const auto& a : attributes) w += a.width_bits;
  return w;
}

std::uint32_t Schema::total_slot_bits() const {
  std::uint32_t w = 0;
  for (const auto& a : attributes) w += a.slot_bits();
  return w;
}

void Schema::validate() const {
  std::set<std::string> names;
  for (const auto& a : attributes) {
    if (a.name.empty()) throw FormatError("attribute without a name");
    if (!names.insert(a.name).second) throw FormatError("duplicate attribute '" + a.name + "'");
    if (a.width_bits == 0 || a.width_bits > 64) {
      throw FormatError("attribute '" + a.name + "' width must be in [1, 64]");
    }
    if (a.kind == AttrKind::kCategorical && a.dictionary.size() > a.max_code() + 1) {
      throw FormatError("dictionary of '" + a.name + "' does not fit its width");
    }
    if (!std::is_sorted(a.domain.begin(), a.domain.end())) {
      throw FormatError("domain of '" + a.name + "' is not sorted");
    }
    for (auto c : a.domain) {
      if (c > a.max_code()) throw FormatError("domain of '" + a.name + "' exceeds its width");
    }
    if (!a.parent.empty()) {
      if (!find(a.parent)) throw FormatError("parent '" + a.parent + "' of '" + a.name + "' is unknown");
      if (a.parent_codes.size() != a.domain.size()) {
        throw FormatError("parent codes of '" + a.name + "' do not match its domain");
      }
    }
  }
}

const std::vector<std::uint64_t>& Relation::column(std::string_view name) const {
  return columns.at(schema.index_of(name));
}

std::vector<std::uint64_t>& Relation::column(std::string_view name) {
  return columns.at(schema.index_of(name));
}

void Relation::validate() const {
  schema.validate();
  if (columns.size() != schema.attributes.size()) throw FormatError("column count does not match schema");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].size() != rows()) throw FormatError("ragged column '" + schema.attributes[i].name + "'");
    const auto mx = schema.attributes[i].max_code();
    for (auto v : columns[i]) {
      if (v > mx) throw FormatError("value of '" + schema.attributes[i].name + "' exceeds its width");
    }
  }
}

}  // namespace pimolap
