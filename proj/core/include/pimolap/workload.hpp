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
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pimolap/query.hpp"
#include "pimolap/schema.hpp"

namespace pimolap::workload {

struct WorkloadSpec {
  double scale_factor = 0.01;
  std::uint64_t base_rows = 6'000'000;
  double customer_skew = 1.0;
  double supplier_skew = 1.0;
  double part_skew = 1.0;
  std::uint64_t seed = 42;

  std::uint64_t fact_rows() const;
  void validate() const;
};

/// Deterministic 64-bit generator with portable derived draws (the standard
/// distributions are implementation defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi);

 private:
  std::mt19937_64 engine_;
};

/// Zipf over n items with exponent s; item ranks are a seeded permutation so
/// the most frequent item is not always the first.
class Zipf {
 public:
  Zipf(std::size_t n, double exponent, Rng& rng);
  std::size_t operator()(Rng& rng) const;
  std::size_t size() const { return rank_to_item_.size(); }
  double probability(std::size_t item) const;

 private:
  std::vector<double> cdf_;
  std::vector<std::size_t> rank_to_item_;
  std::vector<std::size_t> item_to_rank_;
};

/// Schema of the pre-joined relation, without the long text attributes.
Schema ssb_schema();

/// Generates the pre-joined fact x customer x supplier x part x date
/// relation.
Relation generate(const WorkloadSpec& spec);

struct QueryTemplate {
  std::string id;
  double target_selectivity = 0.0;
  std::string aggregate;
  std::vector<std::string> group_by;
  /// Candidate WHERE clauses in a fixed order.
  std::vector<Predicate> candidates;
};

/// The thirteen templates in four flights.
std::vector<QueryTemplate> templates();
const QueryTemplate& find_template(const std::vector<QueryTemplate>& all, const std::string& id);

struct Instantiation {
  Query query;
  double base_selectivity = 0.0;
  double achieved_selectivity = 0.0;
  std::uint64_t selected = 0;
  bool degenerate = false;
};

/// Picks the candidate whose selectivity is the smallest one not below the
/// target (the largest otherwise), then narrows it with a cap on
/// lo_supplycost chosen from the sorted values of the surviving rows so the
/// count is closest to the target on a log scale.
Instantiation instantiate_query(const QueryTemplate& tmpl, const Relation& relation);

/// Generates the relation and all thirteen queries under `dir`:
/// relation/ (manifest and columns), queries/<id>.qry and workload.json.
std::vector<Instantiation> generate_to(const WorkloadSpec& spec, const std::filesystem::path& dir);

}  // namespace pimolap::workload
