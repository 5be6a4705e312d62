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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pimolap/device.hpp"

namespace pimolap::planner {

/// T / M = a * sqrt(r) + b for one reads-per-record count.
struct SqrtFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 1.0;
};

/// T = slope * M + intercept for one aggregation granule count.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

/// Fitted latency models (nanoseconds), keyed by reads_per_record (host)
/// and aggregated granules (PIM, one table per aggregation engine).
struct ModelTables {
  std::string layout;
  std::map<std::uint32_t, SqrtFit> host;
  std::map<std::uint32_t, LinearFit> pim_alu;
  std::map<std::uint32_t, LinearFit> pim_logic;

  const std::map<std::uint32_t, LinearFit>& pim(device::AggEngine engine) const {
    return engine == device::AggEngine::kAlu ? pim_alu : pim_logic;
  }
  /// Throws ModelError on a missing entry.
  const SqrtFit& host_fit(std::uint32_t reads_per_record) const;
  const LinearFit& pim_fit(device::AggEngine engine, std::uint32_t granules) const;

  /// Host-gb estimate M * (a * sqrt(r) + b).
  double host_latency(std::uint32_t reads_per_record, double pages, double r) const;
  /// One pim-gb subgroup: slope * M + intercept.
  double pim_latency(device::AggEngine engine, std::uint32_t granules, double pages) const;

  std::string to_json() const;
  static ModelTables from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static ModelTables load(const std::filesystem::path& path);
};

struct HostSample {
  std::uint32_t reads_per_record = 1;
  double pages = 1;
  double r = 0;
  double latency_ns = 0;
};

struct PimSample {
  std::uint32_t granules = 1;
  double pages = 1;
  double latency_ns = 0;
};

/// Least-squares fit of T/M against sqrt(r) for every reads_per_record.
/// Needs at least 3 distinct M and 5 distinct r per key; throws ModelError
/// otherwise or when the system is rank deficient.
std::map<std::uint32_t, SqrtFit> fit_host(const std::vector<HostSample>& samples);

/// Least-squares fit of T against M for every granule count. Needs at least
/// 3 distinct M per key.
std::map<std::uint32_t, LinearFit> fit_pim(const std::vector<PimSample>& samples);

struct GroupByPlan {
  std::uint64_t k = 0;
  std::uint64_t k_max = 1;
  double pages = 0;
  std::uint32_t reads_per_record = 0;
  std::uint32_t granules = 0;
  /// predicted[k] for k = 0..k_max.
  std::vector<double> predicted;
  double predicted_best() const { return predicted.at(k); }
};

/// Evaluates T(k) = k * T_pim(M, n) + [k < k_max] * T_host(M, s, r(k)) for
/// k = 0..k_max and returns the smallest minimiser.
GroupByPlan plan_groupby(const ModelTables& tables, device::AggEngine engine, std::uint32_t reads_per_record,
                         std::uint32_t granules, double pages, std::uint64_t k_max,
                         const std::function<double(std::uint64_t)>& r);

}  // namespace pimolap::planner
