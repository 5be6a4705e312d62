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
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pimolap {

/// Simulated time in nanoseconds.
using Nanoseconds = double;

inline constexpr double kTenYearsSeconds = 10.0 * 365.0 * 24.0 * 3600.0;

/// Latency, energy and power parameters of the PIM module. Energies are in
/// joules, powers in watts, times in nanoseconds.
struct CostParams {
  Nanoseconds t_logic_cycle = 30.0;
  double e_logic_per_bit = 81.6e-15;
  double e_read_per_bit = 0.84e-12;
  double e_write_per_bit = 6.9e-12;
  double p_agg_circuit = 25.4e-6;
  double p_controller = 126e-6;
  Nanoseconds t_read = 30.0;         // one 16-bit crossbar read
  Nanoseconds t_write = 30.0;        // one crossbar result write
  Nanoseconds t_dispatch = 10.0;     // per PIM request on the command channel
  Nanoseconds t_host_read = 60.0;    // one 512-bit line
  Nanoseconds t_host_write = 60.0;
  Nanoseconds t_host_record = 5.0;   // host work per granule of a selected record
  std::uint32_t cells_per_row = 512;
  Nanoseconds power_window = 30.0;
  std::uint32_t logic_agg_factor = 12;  // logic-only aggregation: cycles = factor * w * log2(rows)

  /// Throws InvalidArgumentError unless every parameter is strictly positive.
  void validate() const;

  /// Sets a parameter by its field name; throws on unknown names.
  void set(const std::string& name, double value);
  std::map<std::string, double> as_map() const;
};

enum class EventKind {
  kLogicCycle,
  kGranuleRead,
  kGranuleWrite,
  kLineRead,
  kLineWrite,
  kAggActive,
  kControllerActive,
};

const char* to_string(EventKind kind);

/// One entry of the power trace. Energy is spread uniformly over
/// [start, start + duration) and split evenly across chips
/// [chip_first, chip_first + chip_count).
struct Event {
  EventKind kind;
  Nanoseconds start;
  Nanoseconds duration;
  double quantity;  // bits for data events, active units for static power
  double energy;
  std::uint16_t chip_first;
  std::uint16_t chip_count;
};

struct CostReport {
  double total_latency = 0.0;  // seconds
  double pim_energy = 0.0;     // joules
  std::vector<double> peak_power;  // watts, per chip
  std::uint64_t max_row_writes = 0;
  double required_endurance_10y = 0.0;  // writes per cell

  double peak_power_max() const;
};

/// ceil((10 years / query_latency) * max_row_writes / cells_per_row).
double endurance_10y(std::uint64_t max_row_writes, double query_latency_s,
                     std::uint32_t cells_per_row = 512);
double endurance_10y(const CostReport& report, double query_latency_s,
                     std::uint32_t cells_per_row = 512);

/// Per-chip peak of window-averaged power over a trace.
std::vector<double> peak_power(std::span<const Event> events, std::uint32_t chips,
                               Nanoseconds window);

/// Sum of event energies.
double total_energy(std::span<const Event> events);

struct KindTotals {
  std::uint64_t events = 0;
  double quantity = 0.0;
  double energy = 0.0;
};

/// Append-only accumulator of cost events for one device.
class CostLedger {
 public:
  explicit CostLedger(CostParams params = {}, std::uint32_t chips = 8);

  const CostParams& params() const { return params_; }
  std::uint32_t chips() const { return chips_; }

  /// Records an event. For data events `quantity` is a bit count and energy is
  /// bits times the per-bit energy; for static events it is the number of
  /// active units and energy is units * power * duration. Zero-duration events
  /// carry no energy and are dropped.
  void charge(EventKind kind, double quantity, Nanoseconds start, Nanoseconds duration,
              std::uint16_t chip_first = 0, std::uint16_t chip_count = 0);

  void note_cell_writes(std::uint64_t writes) { cell_writes_ += writes; }
  std::uint64_t cell_writes() const { return cell_writes_; }

  std::span<const Event> events() const { return events_; }
  KindTotals totals(EventKind kind) const;
  double energy() const;

  CostReport report(std::uint64_t max_row_writes, double latency_s) const;

  void clear();

 private:
  CostParams params_;
  std::uint32_t chips_;
  std::vector<Event> events_;
  std::uint64_t cell_writes_ = 0;
};

std::string report_csv_header();
std::string report_csv_units();
std::string report_csv_row(const CostReport& report);
std::string report_json(const CostReport& report);

}  // namespace pimolap
