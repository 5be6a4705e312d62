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

#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "pimolap/errors.hpp"
#include "pimolap/query.hpp"
#include "pimolap/workload.hpp"

using namespace pimolap;

namespace {

const char* kExample = R"(# flight two
QUERY q2.1
TARGET 8.0e-3
WHERE p_category = 'MFGR#12' AND s_region = 'AMERICA'
AGG SUM lo_revenue
GROUPBY d_year, p_brand1
)";

std::size_t error_column(std::string_view text, std::size_t* line = nullptr) {
  try {
    parse_query(text);
  } catch (const ParseError& e) {
    if (line) *line = e.line();
    return e.column();
  }
  ADD_FAILURE() << "no ParseError for: " << text;
  return 0;
}

Predicate random_pred(std::mt19937_64& rng, int depth) {
  static const char* names[] = {"lo_quantity", "lo_discount", "d_year", "c_region", "p_brand1"};
  const auto roll = rng() % 8;
  if (depth == 0 || roll < 3) {
    const std::string a = names[rng() % 5];
    const auto op = static_cast<CmpOp>(rng() % 8);
    auto lit = [&]() -> Literal {
      if (rng() % 2) return Literal(rng() % 1000);
      return Literal("v" + std::to_string(rng() % 50));
    };
    if (rng() % 10 == 0) return Predicate::compare_attrs(a, static_cast<CmpOp>(rng() % 6), names[rng() % 5]);
    if (op == CmpOp::kBetween) return Predicate::compare(a, op, {lit(), lit()});
    if (op == CmpOp::kIn) return Predicate::compare(a, op, {lit(), lit(), lit()});
    return Predicate::compare(a, op, {lit()});
  }
  if (roll == 3) return Predicate::negate(random_pred(rng, depth - 1));
  if (roll == 4) return rng() % 2 ? Predicate::always() : Predicate::never();
  std::vector<Predicate> kids;
  for (int i = 0; i < 2 + static_cast<int>(rng() % 2); ++i) kids.push_back(random_pred(rng, depth - 1));
  return roll < 6 ? Predicate::all_of(std::move(kids)) : Predicate::any_of(std::move(kids));
}

}  // namespace

TEST(ParseQuery, Example) {
  const auto q = parse_query(kExample);
  EXPECT_EQ(q.name, "q2.1");
  ASSERT_TRUE(q.target_selectivity.has_value());
  EXPECT_DOUBLE_EQ(*q.target_selectivity, 8.0e-3);
  EXPECT_EQ(q.agg.op, fabric::AggOp::kSum);
  EXPECT_EQ(q.agg.attribute, "lo_revenue");
  EXPECT_EQ(q.group_by, (std::vector<std::string>{"d_year", "p_brand1"}));
  EXPECT_EQ(q.where.attributes(), (std::set<std::string>{"p_category", "s_region"}));
}

TEST(ParseQuery, TextRoundTrip) {
  const auto q = parse_query(kExample);
  const auto again = parse_query(q.to_text());
  EXPECT_EQ(again.to_text(), q.to_text());
  EXPECT_EQ(again.where.to_string(), q.where.to_string());
}

TEST(ParseQuery, SeveralWhereLinesAreConjoined) {
  const auto q = parse_query("WHERE a = 1\nWHERE b < 2\nAGG MAX c\n");
  EXPECT_EQ(q.where.kind, Predicate::Kind::kAnd);
  EXPECT_EQ(q.where.attributes(), (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(q.agg.op, fabric::AggOp::kMax);
  EXPECT_TRUE(q.group_by.empty());
}

TEST(ParseQuery, ErrorsCarryLineAndColumn) {
  std::size_t line = 0;
  EXPECT_EQ(error_column("# c\nAGG SUM x\nWHERE a = = 3\n", &line), 11u);
  EXPECT_EQ(line, 3u);
  EXPECT_EQ(error_column("AGG SUM x\n  FROB y\n", &line), 3u);
  EXPECT_EQ(line, 2u);
  EXPECT_EQ(error_column("WHERE a = 'open\nAGG SUM x\n", &line), 11u);
  EXPECT_EQ(error_column("WHERE (a = 1\nAGG SUM x\n"), 13u);
  EXPECT_EQ(error_column("WHERE a IN 1, 2\nAGG SUM x\n"), 12u);
  EXPECT_EQ(error_column("TARGET lots\nAGG SUM x\n"), 8u);
  EXPECT_EQ(error_column("AGG AVG x\n"), 5u);
  EXPECT_EQ(error_column("AGG SUM x\nGROUPBY a, 9b\n"), 12u);
  EXPECT_THROW(parse_query("WHERE a = 1\n"), ParseError);
  EXPECT_THROW(parse_predicate("a ! 3"), ParseError);
  EXPECT_THROW(parse_predicate("a = 99999999999999999999999"), ParseError);
}

TEST(ParsePredicate, RandomRoundTrip) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_pred(rng, 4);
    const auto text = p.to_string();
    EXPECT_EQ(parse_predicate(text).to_string(), text);
  }
}

TEST(ParsePredicate, PrecedenceAndKeywords) {
  const auto p = parse_predicate("a = 1 OR b = 2 AND NOT c BETWEEN 3 AND 4");
  ASSERT_EQ(p.kind, Predicate::Kind::kOr);
  ASSERT_EQ(p.children.size(), 2u);
  EXPECT_EQ(p.children[1].kind, Predicate::Kind::kAnd);
  EXPECT_EQ(p.children[1].children[1].kind, Predicate::Kind::kNot);
  const auto q = parse_predicate("x <> y");
  EXPECT_TRUE(q.attr_vs_attr());
  EXPECT_EQ(q.op, CmpOp::kNe);
}

TEST(BindQuery, ResolvesAndRejects) {
  const auto s = workload::ssb_schema();
  const auto q = bind_query(parse_query(kExample), s);
  EXPECT_EQ(s.attributes[q.agg_index].name, "lo_revenue");
  ASSERT_EQ(q.group_index.size(), 2u);
  EXPECT_EQ(s.attributes[q.group_index[1]].name, "p_brand1");
  EXPECT_THROW(bind_query(parse_query("WHERE nope = 1\nAGG SUM lo_revenue\n"), s), InvalidArgumentError);
  EXPECT_THROW(bind_query(parse_query("WHERE lo_discount = 99\nAGG SUM lo_revenue\n"), s), InvalidArgumentError);
  EXPECT_THROW(bind_query(parse_query("WHERE c_region = 'MARS'\nAGG SUM lo_revenue\n"), s), InvalidArgumentError);
  EXPECT_THROW(bind_query(parse_query("AGG SUM lo_revenue\nGROUPBY nope\n"), s), InvalidArgumentError);
}

TEST(BindQuery, BoundPredicateMatchesOracle) {
  workload::WorkloadSpec spec;
  spec.scale_factor = 0.0005;
  const auto rel = workload::generate(spec);
  std::mt19937_64 rng(2);
  const char* texts[] = {"c_region = 'ASIA' AND d_year >= 1995", "p_brand1 BETWEEN 'MFGR#1201' AND 'MFGR#1240'",
                         "NOT (lo_discount IN (1, 2, 3) OR lo_quantity < 10)", "lo_supplycost > lo_quantity"};
  for (const char* t : texts) {
    const auto b = bind(parse_predicate(t), rel.schema);
    for (int i = 0; i < 200; ++i) {
      const auto row = rng() % rel.rows();
      EXPECT_EQ(evaluate(b, rel, row), oracle::match_row(b, rel, row)) << t;
    }
  }
}

TEST(KMax, NoGroupByIsOne) {
  const auto s = workload::ssb_schema();
  EXPECT_EQ(k_max(bind_query(parse_query("WHERE d_year = 1993\nAGG SUM lo_revenue\n"), s), s), 1u);
}

TEST(KMax, HierarchyNarrowsDescendants) {
  const auto s = workload::ssb_schema();
  auto km = [&](const char* text) { return k_max(bind_query(parse_query(text), s), s); };
  // 25 nations x 10 cities, 5 regions
  EXPECT_EQ(km("AGG SUM lo_revenue\nGROUPBY c_city\n"), 250u);
  EXPECT_EQ(km("WHERE c_region = 'ASIA'\nAGG SUM lo_revenue\nGROUPBY c_city\n"), 50u);
  EXPECT_EQ(km("WHERE c_nation = 'CHINA'\nAGG SUM lo_revenue\nGROUPBY c_city, c_region\n"), 10u);
  EXPECT_EQ(km("WHERE d_year = 1997\nAGG SUM lo_revenue\nGROUPBY d_yearmonth\n"), 12u);
  EXPECT_EQ(km("WHERE d_yearmonth = 'Dec1997'\nAGG SUM lo_revenue\nGROUPBY d_year\n"), 1u);
  EXPECT_EQ(km("WHERE c_region = 'ASIA' OR d_year = 1997\nAGG SUM lo_revenue\nGROUPBY c_region\n"), 5u);
}

TEST(KMax, SsbTemplatesSubgroupTotals) {
  workload::WorkloadSpec spec;
  spec.scale_factor = 0.002;
  const auto rel = workload::generate(spec);
  const std::map<std::string, std::uint64_t> totals = {
      {"q1.1", 1},   {"q1.2", 1},  {"q1.3", 1}, {"q2.1", 280}, {"q2.2", 56}, {"q2.3", 7}, {"q3.1", 150},
      {"q3.2", 600}, {"q3.3", 24}, {"q3.4", 4}, {"q4.1", 35},  {"q4.2", 50}, {"q4.3", 800}};
  for (const auto& t : workload::templates()) {
    const auto inst = workload::instantiate_query(t, rel);
    EXPECT_EQ(k_max(bind_query(inst.query, rel.schema), rel.schema), totals.at(t.id)) << t.id;
  }
}
