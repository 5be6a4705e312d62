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

#include "pimolap/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "pimolap/errors.hpp"

namespace pimolap {

namespace {

struct NamedParam {
  const char* name;
  double CostParams::*field;
};

constexpr NamedParam kDoubleParams[] = {
    {"t_logic_cycle", &CostParams::t_logic_cycle},
    {"e_logic_per_bit", &CostParams::e_logic_per_bit},
    {"e_read_per_bit", &CostParams::e_read_per_bit},
    {"e_write_per_bit", &CostParams::e_write_per_bit},
    {"p_agg_circuit", &CostParams::p_agg_circuit},
    {"p_controller", &CostParams::p_controller},
    {"t_read", &CostParams::t_read},
    {"t_write", &CostParams::t_write},
    {"t_dispatch", &CostParams::t_dispatch},
    {"t_host_read", &CostParams::t_host_read},
    {"t_host_write", &CostParams::t_host_write},
    {"t_host_record", &CostParams::t_host_record},
    {"power_window", &CostParams::power_window},
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void CostParams::validate() const {
  for (const auto& p : kDoubleParams) {
    const double v = this->*p.field;
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgumentError(std::string("cost parameter ") + p.name + " must be positive");
    }
  }
  if (cells_per_row == 0) throw InvalidArgumentError("cost parameter cells_per_row must be positive");
  if (logic_agg_factor == 0) throw InvalidArgumentError("cost parameter logic_agg_factor must be positive");
}

void CostParams::set(const std::string& name, double value) {
  for (const auto& p : kDoubleParams) {
    if (name == p.name) {
      this->*p.field = value;
      return;
    }
  }
  if (name == "cells_per_row") {
    cells_per_row = static_cast<std::uint32_t>(value);
  } else if (name == "logic_agg_factor") {
    logic_agg_factor = static_cast<std::uint32_t>(value);
  } else {
    throw InvalidArgumentError("unknown cost parameter '" + name + "'");
  }
}

std::map<std::string, double> CostParams::as_map() const {
  std::map<std::string, double> out;
  for (const auto& p : kDoubleParams) out[p.name] = this->*p.field;
  out["cells_per_row"] = cells_per_row;
  out["logic_agg_factor"] = logic_agg_factor;
  return out;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kLogicCycle: return "logic_cycle";
    case EventKind::kGranuleRead: return "granule_read";
    case EventKind::kGranuleWrite: return "granule_write";
    case EventKind::kLineRead: return "line_read";
    case EventKind::kLineWrite: return "line_write";
    case EventKind::kAggActive: return "agg_active";
    case EventKind::kControllerActive: return "controller_active";
  }
  return "?";
}

double CostReport::peak_power_max() const {
  return peak_power.empty() ? 0.0 : *std::max_element(peak_power.begin(), peak_power.end());
}

double endurance_10y(std::uint64_t max_row_writes, double query_latency_s,
                     std::uint32_t cells_per_row) {
  if (!(query_latency_s > 0.0)) throw InvalidArgumentError("query latency must be positive");
  if (cells_per_row == 0) throw InvalidArgumentError("cells_per_row must be positive");
  return std::ceil(kTenYearsSeconds / query_latency_s * static_cast<double>(max_row_writes) /
                   static_cast<double>(cells_per_row));
}

double endurance_10y(const CostReport& report, double query_latency_s, std::uint32_t cells_per_row) {
  return endurance_10y(report.max_row_writes, query_latency_s, cells_per_row);
}

double total_energy(std::span<const Event> events) {
  double e = 0.0;
  for (const auto& ev : events) e += ev.energy;
  return e;
}

std::vector<double> peak_power(std::span<const Event> events, std::uint32_t chips,
                               Nanoseconds window) {
  std::vector<double> peaks(chips, 0.0);
  for (std::uint32_t chip = 0; chip < chips; ++chip) {
    // Piecewise-constant power: +P at start, -P at end.
    std::vector<std::pair<double, double>> steps;
    for (const auto& ev : events) {
      if (chip < ev.chip_first || chip >= ev.chip_first + ev.chip_count) continue;
      const double p = ev.energy / ev.chip_count / (ev.duration * 1e-9);
      steps.emplace_back(ev.start, p);
      steps.emplace_back(ev.start + ev.duration, -p);
    }
    if (steps.empty()) continue;
    std::sort(steps.begin(), steps.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double power = 0.0;
    double best = 0.0;
    double window_energy = 0.0;
    auto cur_window = static_cast<long long>(std::floor(steps.front().first / window));
    double t = static_cast<double>(cur_window) * window;
    auto advance = [&](double at) {
      while (t < at) {
        const double window_end = static_cast<double>(cur_window + 1) * window;
        if (at < window_end) {
          window_energy += power * (at - t);
          t = at;
          break;
        }
        window_energy += power * (window_end - t);
        best = std::max(best, window_energy / window);
        window_energy = 0.0;
        ++cur_window;
        t = window_end;
        const auto target = static_cast<long long>(std::floor(at / window));
        if (target > cur_window) {
          // Windows entirely inside a constant-power segment.
          best = std::max(best, power);
          cur_window = target;
          t = static_cast<double>(cur_window) * window;
        }
      }
    };
    for (const auto& [at, delta] : steps) {
      advance(at);
      power += delta;
      if (std::abs(power) < 1e-15) power = 0.0;
    }
    best = std::max(best, window_energy / window);
    peaks[chip] = best;
  }
  return peaks;
}

CostLedger::CostLedger(CostParams params, std::uint32_t chips) : params_(params), chips_(chips) {
  params_.validate();
  if (chips_ == 0) throw InvalidArgumentError("ledger needs at least one chip");
}

void CostLedger::charge(EventKind kind, double quantity, Nanoseconds start, Nanoseconds duration,
                        std::uint16_t chip_first, std::uint16_t chip_count) {
  if (quantity < 0.0 || duration < 0.0 || start < 0.0) {
    throw InvalidArgumentError(std::string("negative scope for ") + to_string(kind) + " event");
  }
  if (duration == 0.0 || quantity == 0.0) return;
  if (chip_count == 0) {
    chip_first = 0;
    chip_count = static_cast<std::uint16_t>(chips_);
  }
  if (chip_first + chip_count > chips_) throw OutOfRangeError("event attributed to a non-existent chip");

  double energy = 0.0;
  switch (kind) {
    case EventKind::kLogicCycle: energy = quantity * params_.e_logic_per_bit; break;
    case EventKind::kGranuleRead:
    case EventKind::kLineRead: energy = quantity * params_.e_read_per_bit; break;
    case EventKind::kGranuleWrite:
    case EventKind::kLineWrite: energy = quantity * params_.e_write_per_bit; break;
    case EventKind::kAggActive: energy = quantity * params_.p_agg_circuit * duration * 1e-9; break;
    case EventKind::kControllerActive: energy = quantity * params_.p_controller * duration * 1e-9; break;
  }
  events_.push_back(Event{kind, start, duration, quantity, energy, chip_first, chip_count});
}

KindTotals CostLedger::totals(EventKind kind) const {
  KindTotals t;
  for (const auto& ev : events_) {
    if (ev.kind != kind) continue;
    ++t.events;
    t.quantity += ev.quantity;
    t.energy += ev.energy;
  }
  return t;
}

double CostLedger::energy() const { return total_energy(events_); }

CostReport CostLedger::report(std::uint64_t max_row_writes, double latency_s) const {
  CostReport r;
  r.total_latency = latency_s;
  r.pim_energy = energy();
  r.peak_power = peak_power(events_, chips_, params_.power_window);
  r.max_row_writes = max_row_writes;
  r.required_endurance_10y =
      latency_s > 0.0 ? endurance_10y(max_row_writes, latency_s, params_.cells_per_row) : 0.0;
  return r;
}

void CostLedger::clear() {
  events_.clear();
  cell_writes_ = 0;
}

std::string report_csv_header() {
  return "total_latency,pim_energy,peak_power,max_row_writes,required_endurance_10y";
}

std::string report_csv_units() { return "s,J,W,writes,writes/cell"; }

std::string report_csv_row(const CostReport& report) {
  std::ostringstream os;
  os << fmt(report.total_latency) << ',' << fmt(report.pim_energy) << ','
     << fmt(report.peak_power_max()) << ',' << report.max_row_writes << ','
     << fmt(report.required_endurance_10y);
  return os.str();
}

std::string report_json(const CostReport& report) {
  nlohmann::json j;
  j["total_latency"] = report.total_latency;
  j["pim_energy"] = report.pim_energy;
  j["peak_power"] = report.peak_power;
  j["max_row_writes"] = report.max_row_writes;
  j["required_endurance_10y"] = report.required_endurance_10y;
  return j.dump();
}

}  // namespace pimolap
