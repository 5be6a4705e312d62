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
#include <vector>

#include "pimolap/device.hpp"
#include "pimolap/engine.hpp"
#include "pimolap/layout.hpp"
#include "pimolap/microcode.hpp"
#include "pimolap/planner.hpp"
#include "pimolap/schema.hpp"

namespace pimolap::calibration {

/// Measurement grid. reads_per_record s is realised as one aggregated
/// granule plus s - 1 single-granule identifiers, so s is at most 6.
struct Grid {
  std::vector<std::uint64_t> pages{1, 2, 4, 8, 16};
  std::vector<double> r{1e-4, 1e-3, 1e-2, 0.1, 0.5};
  std::vector<std::uint32_t> reads_per_record{1, 2, 3, 4, 5, 6};
  std::vector<std::uint32_t> granules{1, 2, 3, 4};
  std::uint64_t seed = 7;

  void validate() const;
};

inline constexpr std::uint32_t kMaxReadsPerRecord = 6;
inline constexpr std::uint32_t kMaxGranules = 4;

/// g0..g4: 16-bit identifiers (dimension side), v1..v4: values of 1..4
/// granules, sel: 16-bit uniform selector.
Schema synthetic_schema();

/// Uniformly random contents.
Relation synthetic_relation(std::uint64_t records, std::uint64_t seed);

/// Host-gb latency of SUM(v1) GROUP BY g0..g(s-2) WHERE sel < ceil(r * 2^16),
/// one thread over every page. Returns the group-by phase only; the fraction
/// actually selected goes to `r_actual`.
Nanoseconds measure_host_gb(const LoadedRelation& rel, device::PimDevice& dev, std::uint32_t reads_per_record,
                            double r, double* r_actual = nullptr, const microcode::CycleTable& cycles = {});

/// Latency of one pim-gb subgroup (g0 = key) aggregating v<granules> over
/// every page after a WHERE TRUE filter.
Nanoseconds measure_pim_gb(const LoadedRelation& rel, device::PimDevice& dev, std::uint32_t granules,
                           device::AggEngine engine, std::uint64_t key = 0, const microcode::CycleTable& cycles = {});

struct Measurements {
  std::vector<planner::HostSample> host;
  std::vector<planner::PimSample> pim_alu;
  std::vector<planner::PimSample> pim_logic;
};

Measurements measure(LayoutMode layout, const Grid& grid, const device::DeviceGeometry& geometry = {},
                     const CostParams& params = {}, const microcode::CycleTable& cycles = {});

planner::ModelTables fit(const Measurements& m, LayoutMode layout);

}  // namespace pimolap::calibration
