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

#include "pimolap/crossbar.hpp"
#include "pimolap/predicate.hpp"
#include "pimolap/schema.hpp"

namespace pimolap {

struct Aggregate {
  fabric::AggOp op = fabric::AggOp::kSum;
  std::string attribute;
};

fabric::AggOp agg_op_from_string(std::string_view text);

/// select AGG(attribute) from relation where ... group by ...
struct Query {
  std::string name;
  std::optional<double> target_selectivity;
  Predicate where = Predicate::always();
  Aggregate agg;
  std::vector<std::string> group_by;

  /// Serialises to the line-oriented query text format.
  std::string to_text() const;
};

/// Parses one query:
///
///   # comment
///   QUERY q2.1
///   TARGET 8.0e-3
///   WHERE p_category = 'MFGR#12' AND s_region = 'AMERICA'
///   AGG SUM lo_revenue
///   GROUPBY d_year, p_brand1
///
/// Several WHERE lines are combined with AND. Throws ParseError.
Query parse_query(std::string_view text);

/// Parses a WHERE expression on its own.
Predicate parse_predicate(std::string_view text);

/// A query resolved against a schema.
struct BoundQuery {
  Query query;
  Predicate where;
  std::size_t agg_index = 0;
  std::vector<std::size_t> group_index;
};

BoundQuery bind_query(const Query& query, const Schema& schema);

/// Values each group-by attribute can take among rows passing the filter,
/// judged from single-attribute conjuncts of the WHERE clause and the
/// attribute hierarchy (a constraint on an ancestor or descendant narrows
/// the attribute too).
std::vector<std::vector<std::uint64_t>> feasible_group_values(const BoundQuery& query, const Schema& schema);

/// Number of potential subgroups: product of the feasible value counts, 1
/// for a query without GROUP BY.
std::uint64_t k_max(const BoundQuery& query, const Schema& schema);

}  // namespace pimolap
