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
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pimolap/schema.hpp"

namespace pimolap {

enum class CmpOp { kEq, kNe, kLt, kLe, kGt, kGe, kBetween, kIn };

const char* to_string(CmpOp op);

/// Immediate in a predicate: an integer or a quoted string (dictionary value
/// or ISO date).
struct Literal {
  std::variant<std::uint64_t, std::string> value;

  Literal() : value(std::uint64_t{0}) {}
  Literal(std::uint64_t v) : value(v) {}  // NOLINT
  Literal(std::string v) : value(std::move(v)) {}  // NOLINT
  Literal(const char* v) : value(std::string(v)) {}  // NOLINT

  bool is_string() const { return std::holds_alternative<std::string>(value); }
  std::string text() const;
  bool operator==(const Literal&) const = default;
};

/// Boolean tree over comparisons. Leaves compare an attribute with
/// immediates, or with another attribute (EQ..GE only). After bind() every
/// leaf carries attribute indices and encoded codes.
struct Predicate {
  enum class Kind { kTrue, kFalse, kCompare, kAnd, kOr, kNot };

  Kind kind = Kind::kTrue;
  std::string attribute;
  CmpOp op = CmpOp::kEq;
  std::vector<Literal> literals;
  std::string rhs_attribute;
  std::vector<Predicate> children;

  std::size_t attr_index = 0;
  std::size_t rhs_index = 0;
  std::vector<std::uint64_t> codes;
  bool bound = false;

  static Predicate always();
  static Predicate never();
  static Predicate compare(std::string attribute, CmpOp op, std::vector<Literal> literals);
  static Predicate compare_attrs(std::string lhs, CmpOp op, std::string rhs);
  static Predicate all_of(std::vector<Predicate> children);
  static Predicate any_of(std::vector<Predicate> children);
  static Predicate negate(Predicate child);

  bool is_leaf() const { return kind == Kind::kCompare; }
  bool attr_vs_attr() const { return kind == Kind::kCompare && !rhs_attribute.empty(); }
  std::set<std::string> attributes() const;

  /// Text in the query WHERE grammar; parse(to_string()) round-trips.
  std::string to_string() const;
};

/// Resolves attributes and encodes literals. Throws InvalidArgumentError for
/// unknown attributes, literals that do not fit, or malformed leaves.
Predicate bind(const Predicate& pred, const Schema& schema);

/// Reference evaluation of a bound predicate on row `row`.
bool evaluate(const Predicate& bound, const Relation& relation, std::uint64_t row);

/// Evaluation on explicit codes, `codes[i]` being attribute i of the schema.
bool evaluate(const Predicate& bound, const std::vector<std::uint64_t>& codes);

}  // namespace pimolap
