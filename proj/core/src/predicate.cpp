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

#include "pimolap/predicate.hpp"

#include <algorithm>

#include "pimolap/errors.hpp"

namespace pimolap {

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::kEq: return "=";
    case CmpOp::kNe: return "!=";
    case CmpOp::kLt: return "<";
    case CmpOp::kLe: return "<=";
    case CmpOp::kGt: return ">";
    case CmpOp::kGe: return ">=";
    case CmpOp::kBetween: return "BETWEEN";
    case CmpOp::kIn: return "IN";
  }
  return "?";
}

std::string Literal::text() const {
  if (const auto* v = std::get_if<std::uint64_t>(&value)) return std::to_string(*v);
  std::string out = "'";
  for (char c : std::get<std::string>(value)) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

Predicate Predicate::always() { return Predicate{}; }

Predicate Predicate::never() {
  Predicate p;
  p.kind = Kind::kFalse;
  return p;
}

Predicate Predicate::compare(std::string attribute, CmpOp op, std::vector<Literal> literals) {
  Predicate p;
  p.kind = Kind::kCompare;
  p.attribute = std::move(attribute);
  p.op = op;
  p.literals = std::move(literals);
  return p;
}

Predicate Predicate::compare_attrs(std::string lhs, CmpOp op, std::string rhs) {
  Predicate p;
  p.kind = Kind::kCompare;
  p.attribute = std::move(lhs);
  p.op = op;
  p.rhs_attribute = std::move(rhs);
  return p;
}

Predicate Predicate::all_of(std::vector<Predicate> children) {
  if (children.empty()) return always();
  if (children.size() == 1) return std::move(children.front());
  Predicate p;
  p.kind = Kind::kAnd;
  p.children = std::move(children);
  return p;
}

Predicate Predicate::any_of(std::vector<Predicate> children) {
  if (children.empty()) return never();
  if (children.size() == 1) return std::move(children.front());
  Predicate p;
  p.kind = Kind::kOr;
  p.children = std::move(children);
  return p;
}

Predicate Predicate::negate(Predicate child) {
  Predicate p;
  p.kind = Kind::kNot;
  p.children.push_back(std::move(child));
  return p;
}

std::set<std::string> Predicate::attributes() const {
  std::set<std::string> out;
  if (kind == Kind::kCompare) {
    out.insert(attribute);
    if (!rhs_attribute.empty()) out.insert(rhs_attribute);
  }
  for (const auto& c : children) {
    auto sub = c.attributes();
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

std::string Predicate::to_string() const {
  auto wrap = [](const Predicate& c) {
    return c.kind == Kind::kAnd || c.kind == Kind::kOr ? "(" + c.to_string() + ")" : c.to_string();
  };
  switch (kind) {
    case Kind::kTrue: return "TRUE";
    case Kind::kFalse: return "FALSE";
    case Kind::kNot: return "NOT (" + children.front().to_string() + ")";
    case Kind::kAnd:
    case Kind::kOr: {
      std::string out;
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) out += kind == Kind::kAnd ? " AND " : " OR ";
        out += wrap(children[i]);
      }
      return out;
    }
    case Kind::kCompare: break;
  }
  if (!rhs_attribute.empty()) return attribute + " " + pimolap::to_string(op) + " " + rhs_attribute;
  if (op == CmpOp::kBetween) return attribute + " BETWEEN " + literals.at(0).text() + " AND " + literals.at(1).text();
  if (op == CmpOp::kIn) {
    std::string out = attribute + " IN (";
    for (std::size_t i = 0; i < literals.size(); ++i) out += (i ? ", " : "") + literals[i].text();
    return out + ")";
  }
  return attribute + " " + pimolap::to_string(op) + " " + literals.at(0).text();
}

Predicate bind(const Predicate& pred, const Schema& schema) {
  Predicate out = pred;
  out.children.clear();
  for (const auto& c : pred.children) out.children.push_back(bind(c, schema));
  if (pred.kind == Predicate::Kind::kNot && pred.children.size() != 1) {
    throw InvalidArgumentError("NOT takes exactly one operand");
  }
  if ((pred.kind == Predicate::Kind::kAnd || pred.kind == Predicate::Kind::kOr) && pred.children.empty()) {
    throw InvalidArgumentError("empty boolean combination");
  }
  if (pred.kind == Predicate::Kind::kCompare) {
    out.attr_index = schema.index_of(pred.attribute);
    const auto& attr = schema.attributes[out.attr_index];
    out.codes.clear();
    if (pred.attr_vs_attr()) {
      if (pred.op == CmpOp::kBetween || pred.op == CmpOp::kIn || !pred.literals.empty()) {
        throw InvalidArgumentError("attribute comparison supports =, !=, <, <=, >, >= only");
      }
      out.rhs_index = schema.index_of(pred.rhs_attribute);
    } else {
      const std::size_t want = pred.op == CmpOp::kBetween ? 2 : 1;
      if (pred.op == CmpOp::kIn ? pred.literals.empty() : pred.literals.size() != want) {
        throw InvalidArgumentError("wrong number of operands for " + std::string(to_string(pred.op)) + " on " +
                                   pred.attribute);
      }
      for (const auto& lit : pred.literals) {
        if (const auto* v = std::get_if<std::uint64_t>(&lit.value)) {
          out.codes.push_back(attr.encode(*v));
        } else {
          out.codes.push_back(attr.encode(std::string_view(std::get<std::string>(lit.value))));
        }
      }
    }
  }
  out.bound = true;
  return out;
}

namespace {

bool compare_codes(CmpOp op, std::uint64_t v, const std::vector<std::uint64_t>& codes, std::uint64_t rhs) {
  switch (op) {
    case CmpOp::kEq: return v == rhs;
    case CmpOp::kNe: return v != rhs;
    case CmpOp::kLt: return v < rhs;
    case CmpOp::kLe: return v <= rhs;
    case CmpOp::kGt: return v > rhs;
    case CmpOp::kGe: return v >= rhs;
    case CmpOp::kBetween: return codes[0] <= v && v <= codes[1];
    case CmpOp::kIn: return std::find(codes.begin(), codes.end(), v) != codes.end();
  }
  return false;
}

template <typename Get>
bool eval(const Predicate& p, const Get& get) {
  switch (p.kind) {
    case Predicate::Kind::kTrue: return true;
    case Predicate::Kind::kFalse: return false;
    case Predicate::Kind::kNot: return !eval(p.children.front(), get);
    case Predicate::Kind::kAnd:
      return std::all_of(p.children.begin(), p.children.end(), [&](const auto& c) { return eval(c, get); });
    case Predicate::Kind::kOr:
      return std::any_of(p.children.begin(), p.children.end(), [&](const auto& c) { return eval(c, get); });
    case Predicate::Kind::kCompare: break;
  }
  if (!p.bound) throw InvalidArgumentError("predicate is not bound");
  const auto v = get(p.attr_index);
  const auto rhs = p.attr_vs_attr() ? get(p.rhs_index) : (p.codes.empty() ? 0 : p.codes.front());
  return compare_codes(p.op, v, p.codes, rhs);
}

}  // namespace

bool evaluate(const Predicate& bound, const Relation& relation, std::uint64_t row) {
  return eval(bound, [&](std::size_t i) { return relation.columns[i][row]; });
}

bool evaluate(const Predicate& bound, const std::vector<std::uint64_t>& codes) {
  return eval(bound, [&](std::size_t i) { return codes.at(i); });
}

}  // namespace pimolap
