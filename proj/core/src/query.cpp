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

#include "pimolap/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>

#include "pimolap/errors.hpp"

namespace pimolap {

fabric::AggOp agg_op_from_string(std::string_view text) {
  std::string up(text);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "SUM") return fabric::AggOp::kSum;
  if (up == "MIN") return fabric::AggOp::kMin;
  if (up == "MAX") return fabric::AggOp::kMax;
  throw InvalidArgumentError("unknown aggregate '" + std::string(text) + "' (SUM|MIN|MAX)");
}

namespace {

enum class Tok { kIdent, kInt, kString, kOp, kLParen, kRParen, kComma, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  std::uint64_t value = 0;
  std::size_t column = 0;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t line, std::size_t col0) : s_(text), line_(line), col0_(col0) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (true) {
      while (i < s_.size() && std::isspace(static_cast<unsigned char>(s_[i]))) ++i;
      Token t;
      t.column = col0_ + i;
      if (i >= s_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = s_[i];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
        t.kind = Tok::kIdent;
        t.text = std::string(s_.substr(i, j - i));
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        t.kind = Tok::kInt;
        t.text = std::string(s_.substr(i, j - i));
        auto [p, ec] = std::from_chars(s_.data() + i, s_.data() + j, t.value);
        if (ec != std::errc{}) throw ParseError("integer out of range", line_, t.column);
        (void)p;
        i = j;
      } else if (c == '\'') {
        std::size_t j = i + 1;
        std::string v;
        while (true) {
          if (j >= s_.size()) throw ParseError("unterminated string", line_, t.column);
          if (s_[j] == '\'') {
            if (j + 1 < s_.size() && s_[j + 1] == '\'') {
              v += '\'';
              j += 2;
              continue;
            }
            break;
          }
          v += s_[j++];
        }
        t.kind = Tok::kString;
        t.text = std::move(v);
        i = j + 1;
      } else if (c == '(' || c == ')' || c == ',') {
        t.kind = c == '(' ? Tok::kLParen : c == ')' ? Tok::kRParen : Tok::kComma;
        t.text = std::string(1, c);
        ++i;
      } else if (c == '=' || c == '<' || c == '>' || c == '!') {
        std::string op(1, c);
        if (i + 1 < s_.size() && (s_[i + 1] == '=' || (c == '<' && s_[i + 1] == '>'))) op += s_[i + 1];
        if (op == "!") throw ParseError("expected '!='", line_, t.column);
        t.kind = Tok::kOp;
        t.text = op;
        i += op.size();
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", line_, t.column);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t col0_;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::size_t line) : t_(std::move(toks)), line_(line) {}

  Predicate parse() {
    auto p = parse_or();
    if (peek().kind != Tok::kEnd) fail("unexpected '" + peek().text + "'");
    return p;
  }

 private:
  const Token& peek() const { return t_[pos_]; }
  Token next() { return t_[pos_ == t_.size() - 1 ? pos_ : pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, peek().column); }
  bool keyword(const char* kw) const { return peek().kind == Tok::kIdent && upper(peek().text) == kw; }

  Predicate parse_or() {
    std::vector<Predicate> items{parse_and()};
    while (keyword("OR")) {
      next();
      items.push_back(parse_and());
    }
    return Predicate::any_of(std::move(items));
  }

  Predicate parse_and() {
    std::vector<Predicate> items{parse_unary()};
    while (keyword("AND")) {
      next();
      items.push_back(parse_unary());
    }
    return Predicate::all_of(std::move(items));
  }

  Predicate parse_unary() {
    if (keyword("NOT")) {
      next();
      return Predicate::negate(parse_unary());
    }
    if (keyword("TRUE")) {
      next();
      return Predicate::always();
    }
    if (keyword("FALSE")) {
      next();
      return Predicate::never();
    }
    if (peek().kind == Tok::kLParen) {
      next();
      auto p = parse_or();
      if (peek().kind != Tok::kRParen) fail("expected ')'");
      next();
      return p;
    }
    return parse_compare();
  }

  Literal literal() {
    const auto& t = peek();
    if (t.kind == Tok::kInt) return Literal(next().value);
    if (t.kind == Tok::kString) return Literal(next().text);
    fail("expected a literal");
  }

  Predicate parse_compare() {
    if (peek().kind != Tok::kIdent) fail("expected an attribute name");
    const std::string attr = next().text;
    if (keyword("BETWEEN")) {
      next();
      auto lo = literal();
      if (!keyword("AND")) fail("expected AND in BETWEEN");
      next();
      auto hi = literal();
      return Predicate::compare(attr, CmpOp::kBetween, {lo, hi});
    }
    if (keyword("IN")) {
      next();
      if (peek().kind != Tok::kLParen) fail("expected '(' after IN");
      next();
      std::vector<Literal> lits{literal()};
      while (peek().kind == Tok::kComma) {
        next();
        lits.push_back(literal());
      }
      if (peek().kind != Tok::kRParen) fail("expected ')' closing IN list");
      next();
      return Predicate::compare(attr, CmpOp::kIn, std::move(lits));
    }
    if (peek().kind != Tok::kOp) fail("expected a comparison operator");
    const std::string op_text = next().text;
    static const std::map<std::string, CmpOp> ops = {{"=", CmpOp::kEq},  {"!=", CmpOp::kNe}, {"<>", CmpOp::kNe},
                                                     {"<", CmpOp::kLt},  {"<=", CmpOp::kLe}, {">", CmpOp::kGt},
                                                     {">=", CmpOp::kGe}};
    const auto it = ops.find(op_text);
    if (it == ops.end()) fail("unknown operator '" + op_text + "'");
    if (peek().kind == Tok::kIdent && !keyword("AND") && !keyword("OR")) {
      return Predicate::compare_attrs(attr, it->second, next().text);
    }
    return Predicate::compare(attr, it->second, {literal()});
  }

  std::vector<Token> t_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

Predicate parse_predicate_at(std::string_view text, std::size_t line, std::size_t col0) {
  Lexer lx(text, line, col0);
  Parser p(lx.run(), line);
  return p.parse();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

Predicate parse_predicate(std::string_view text) { return parse_predicate_at(text, 1, 1); }

Query parse_query(std::string_view text) {
  Query q;
  std::vector<Predicate> wheres;
  bool have_agg = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const auto body = trim(raw);
    if (body.empty() || body.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const std::size_t indent = static_cast<std::size_t>(body.data() - raw.data());
    const auto sp = body.find_first_of(" \t");
    const std::string directive = upper(body.substr(0, sp));
    const std::string_view rest = sp == std::string_view::npos ? std::string_view{} : body.substr(sp);
    const std::size_t rest_col = indent + (sp == std::string_view::npos ? body.size() : sp) + 1;
    const auto arg = trim(rest);
    const std::size_t arg_col = rest_col + static_cast<std::size_t>(arg.data() - rest.data());

    if (directive == "QUERY") {
      if (arg.empty()) throw ParseError("QUERY needs a name", line_no, rest_col);
      q.name = std::string(arg);
    } else if (directive == "TARGET") {
      double v = 0;
      const std::string s(arg);
      char extra = 0;
      if (std::sscanf(s.c_str(), "%lf%c", &v, &extra) != 1 || v < 0) {
        throw ParseError("TARGET needs a non-negative number", line_no, arg_col);
      }
      q.target_selectivity = v;
    } else if (directive == "WHERE") {
      if (arg.empty()) throw ParseError("empty WHERE", line_no, rest_col);
      wheres.push_back(parse_predicate_at(rest, line_no, rest_col));
    } else if (directive == "AGG") {
      const auto s2 = arg.find_first_of(" \t");
      if (s2 == std::string_view::npos) throw ParseError("AGG needs an operator and an attribute", line_no, arg_col);
      try {
        q.agg.op = agg_op_from_string(arg.substr(0, s2));
      } catch (const InvalidArgumentError& e) {
        throw ParseError(e.what(), line_no, arg_col);
      }
      const auto attr = trim(arg.substr(s2));
      if (!is_ident(attr)) {
        throw ParseError("bad aggregate attribute", line_no, arg_col + static_cast<std::size_t>(attr.data() - arg.data()));
      }
      q.agg.attribute = std::string(attr);
      have_agg = true;
    } else if (directive == "GROUPBY") {
      q.group_by.clear();
      std::size_t p = 0;
      while (!arg.empty() && p <= arg.size()) {
        auto comma = arg.find(',', p);
        if (comma == std::string_view::npos) comma = arg.size();
        const auto item = trim(arg.substr(p, comma - p));
        const std::size_t col = arg_col + static_cast<std::size_t>(item.data() - arg.data());
        if (!is_ident(item)) throw ParseError("bad GROUPBY attribute", line_no, col);
        q.group_by.emplace_back(item);
        p = comma + 1;
      }
    } else {
      throw ParseError("unknown directive '" + std::string(body.substr(0, sp)) + "'", line_no, indent + 1);
    }
    if (end == text.size()) break;
  }
  if (!have_agg) throw ParseError("missing AGG directive", line_no == 0 ? 1 : line_no, 1);
  q.where = Predicate::all_of(std::move(wheres));
  return q;
}

std::string Query::to_text() const {
  std::string out;
  if (!name.empty()) out += "QUERY " + name + "\n";
  if (target_selectivity) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", *target_selectivity);
    out += std::string("TARGET ") + buf + "\n";
  }
  out += "WHERE " + where.to_string() + "\n";
  out += std::string("AGG ") + (agg.op == fabric::AggOp::kSum ? "SUM" : agg.op == fabric::AggOp::kMin ? "MIN" : "MAX") +
         " " + agg.attribute + "\n";
  if (!group_by.empty()) {
    out += "GROUPBY ";
    for (std::size_t i = 0; i < group_by.size(); ++i) out += (i ? ", " : "") + group_by[i];
    out += "\n";
  }
  return out;
}

BoundQuery bind_query(const Query& query, const Schema& schema) {
  BoundQuery b;
  b.query = query;
  b.where = bind(query.where, schema);
  b.agg_index = schema.index_of(query.agg.attribute);
  std::set<std::size_t> seen;
  for (const auto& g : query.group_by) {
    const auto i = schema.index_of(g);
    if (!seen.insert(i).second) throw InvalidArgumentError("attribute '" + g + "' grouped twice");
    b.group_index.push_back(i);
  }
  return b;
}

namespace {

std::vector<std::uint64_t> full_domain(const Attribute& a) {
  if (!a.domain.empty()) return a.domain;
  if (a.kind == AttrKind::kCategorical) {
    std::vector<std::uint64_t> d(a.dictionary.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = i;
    return d;
  }
  if (a.width_bits > 24) throw InvalidArgumentError("attribute '" + a.name + "' has no bounded domain for grouping");
  std::vector<std::uint64_t> d(std::size_t{1} << a.width_bits);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = i;
  return d;
}

// Code of `code` (an `attr` value) at ancestor level `target`, if any.
std::optional<std::uint64_t> ancestor_code(const Schema& s, std::size_t attr, std::uint64_t code, std::size_t target) {
  std::size_t cur = attr;
  std::uint64_t c = code;
  for (std::size_t guard = 0; guard <= s.attributes.size(); ++guard) {
    if (cur == target) return c;
    const auto& a = s.attributes[cur];
    auto p = a.parent_of(c);
    if (!p) return std::nullopt;
    c = *p;
    cur = s.index_of(a.parent);
  }
  return std::nullopt;
}

void single_attribute_conjuncts(const Predicate& p, std::map<std::size_t, std::vector<const Predicate*>>& out) {
  if (p.kind == Predicate::Kind::kAnd) {
    for (const auto& c : p.children) single_attribute_conjuncts(c, out);
    return;
  }
  if (p.kind == Predicate::Kind::kTrue || p.kind == Predicate::Kind::kFalse) return;
  // Leaves of this conjunct must all reference the same attribute.
  std::set<std::size_t> attrs;
  bool attr_pair = false;
  auto walk = [&](auto&& self, const Predicate& n) -> void {
    if (n.kind == Predicate::Kind::kCompare) {
      attrs.insert(n.attr_index);
      if (n.attr_vs_attr()) attr_pair = true;
    }
    for (const auto& c : n.children) self(self, c);
  };
  walk(walk, p);
  if (attrs.size() == 1 && !attr_pair) out[*attrs.begin()].push_back(&p);
}

}  // namespace

std::vector<std::vector<std::uint64_t>> feasible_group_values(const BoundQuery& query, const Schema& schema) {
  std::map<std::size_t, std::vector<const Predicate*>> constraints;
  single_attribute_conjuncts(query.where, constraints);

  std::vector<std::uint64_t> codes(schema.attributes.size(), 0);
  auto allowed = [&](std::size_t attr, std::uint64_t v) {
    auto it = constraints.find(attr);
    if (it == constraints.end()) return true;
    codes[attr] = v;
    return std::all_of(it->second.begin(), it->second.end(), [&](const Predicate* p) { return evaluate(*p, codes); });
  };

  std::vector<std::vector<std::uint64_t>> out;
  for (auto g : query.group_index) {
    // Values of g reachable from the constrained descendants of g.
    std::vector<std::set<std::uint64_t>> from_descendants;
    for (const auto& [attr, preds] : constraints) {
      if (attr == g) continue;
      const auto& a = schema.attributes[attr];
      if (a.domain.empty() && a.kind != AttrKind::kCategorical) continue;
      const auto dom = full_domain(a);
      if (dom.empty() || !ancestor_code(schema, attr, dom.front(), g)) continue;
      std::set<std::uint64_t> reach;
      for (auto d : dom) {
        if (!allowed(attr, d)) continue;
        if (auto up = ancestor_code(schema, attr, d, g)) reach.insert(*up);
      }
      from_descendants.push_back(std::move(reach));
    }

    std::vector<std::uint64_t> values;
    for (auto v : full_domain(schema.attributes[g])) {
      if (!allowed(g, v)) continue;
      bool ok = true;
      std::size_t cur = g;
      std::uint64_t c = v;
      while (ok && !schema.attributes[cur].parent.empty()) {
        auto p = schema.attributes[cur].parent_of(c);
        if (!p) break;
        cur = schema.index_of(schema.attributes[cur].parent);
        c = *p;
        ok = allowed(cur, c);
      }
      for (const auto& reach : from_descendants) ok = ok && reach.count(v) > 0;
      if (ok) values.push_back(v);
    }
    out.push_back(std::move(values));
  }
  return out;
}

std::uint64_t k_max(const BoundQuery& query, const Schema& schema) {
  std::uint64_t k = 1;
  for (const auto& v : feasible_group_values(query, schema)) k *= v.size();
  return k;
}

}  // namespace pimolap
