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

#include "pimolap/errors.hpp"
#include "pimolap/ledger.hpp"

using namespace pimolap;

TEST(CostParams, DefaultsAreTableValues) {
  CostParams p;
  EXPECT_DOUBLE_EQ(p.t_logic_cycle, 30.0);
  EXPECT_DOUBLE_EQ(p.e_logic_per_bit, 81.6e-15);
  EXPECT_DOUBLE_EQ(p.e_read_per_bit, 0.84e-12);
  EXPECT_DOUBLE_EQ(p.e_write_per_bit, 6.9e-12);
  EXPECT_DOUBLE_EQ(p.p_agg_circuit, 25.4e-6);
  EXPECT_DOUBLE_EQ(p.p_controller, 126e-6);
  EXPECT_EQ(p.cells_per_row, 512u);
  EXPECT_NO_THROW(p.validate());
}

TEST(CostParams, RejectsNonPositiveAndUnknown) {
  CostParams p;
  p.set("t_host_read", 0.0);
  EXPECT_THROW(p.validate(), InvalidArgumentError);
  EXPECT_THROW(p.set("no_such_thing", 1.0), InvalidArgumentError);
  CostParams q;
  q.set("t_dispatch", 25.0);
  EXPECT_DOUBLE_EQ(q.t_dispatch, 25.0);
  EXPECT_EQ(q.as_map().at("t_dispatch"), 25.0);
}

TEST(Ledger, LogicCycleOverOnePage) {
  CostLedger l;
  l.charge(EventKind::kLogicCycle, 32.0 * 1024.0, 0.0, 30.0);
  // 32768 bits * 81.6 fJ
  EXPECT_NEAR(l.energy(), 2.6738688e-9, 1e-21);
}

TEST(Ledger, LineRead) {
  CostLedger l;
  l.charge(EventKind::kLineRead, 512.0, 0.0, 60.0);
  EXPECT_NEAR(l.energy(), 430.08e-12, 1e-24);
}

TEST(Ledger, ZeroDurationCarriesNoEnergy) {
  CostLedger l;
  l.charge(EventKind::kControllerActive, 4.0, 10.0, 0.0);
  l.charge(EventKind::kLineRead, 512.0, 10.0, 0.0);
  EXPECT_EQ(l.energy(), 0.0);
  EXPECT_TRUE(l.events().empty());
}

TEST(Ledger, NegativeScopeRejected) {
  CostLedger l;
  EXPECT_THROW(l.charge(EventKind::kLineRead, -1.0, 0.0, 1.0), InvalidArgumentError);
  EXPECT_THROW(l.charge(EventKind::kLineRead, 1.0, 0.0, -1.0), InvalidArgumentError);
}

TEST(Ledger, StaticPowerEnergy) {
  CostLedger l;
  l.charge(EventKind::kAggActive, 32.0, 0.0, 1000.0);
  EXPECT_NEAR(l.energy(), 32 * 25.4e-6 * 1e-6, 1e-18);
}

TEST(Endurance, HandExample) {
  EXPECT_EQ(endurance_10y(512, 1.0), 3.1536e8);
  EXPECT_EQ(endurance_10y(0, 1.0), 0.0);
  EXPECT_THROW(endurance_10y(1, 0.0), InvalidArgumentError);
}

TEST(Endurance, InverseInLatencyMonotoneInWrites) {
  EXPECT_EQ(endurance_10y(1024, 2.0), endurance_10y(1024, 1.0) / 2);
  double prev = 0;
  for (std::uint64_t w = 0; w < 5000; w += 97) {
    const double e = endurance_10y(w, 0.37);
    EXPECT_GE(e, prev);
    prev = e;
  }
  prev = 1e300;
  for (double t = 1e-6; t < 10; t *= 1.7) {
    const double e = endurance_10y(777, t);
    EXPECT_LE(e, prev);
    prev = e;
  }
}

namespace {

void random_events(CostLedger& l, std::mt19937_64& rng, int n) {
  for (int i = 0; i < n; ++i) {
    const auto kind = static_cast<EventKind>(rng() % 7);
    const double start = static_cast<double>(rng() % 10000);
    const double dur = 1.0 + static_cast<double>(rng() % 500);
    const auto first = static_cast<std::uint16_t>(rng() % 8);
    const auto count = static_cast<std::uint16_t>(1 + rng() % (8 - first));
    l.charge(kind, static_cast<double>(1 + rng() % 4096), start, dur, first, count);
  }
}

}  // namespace

TEST(Ledger, EnergyIsAdditiveOverConcatenation) {
  std::mt19937_64 rng(3);
  CostLedger a, b, ab;
  random_events(a, rng, 300);
  random_events(b, rng, 300);
  for (const auto& e : a.events()) ab.charge(e.kind, e.quantity, e.start, e.duration, e.chip_first, e.chip_count);
  for (const auto& e : b.events()) ab.charge(e.kind, e.quantity, e.start, e.duration, e.chip_first, e.chip_count);
  EXPECT_NEAR(ab.energy(), a.energy() + b.energy(), 1e-12 * ab.energy());
}

TEST(Ledger, DeterministicReports) {
  std::mt19937_64 r1(8), r2(8);
  CostLedger a, b;
  random_events(a, r1, 500);
  random_events(b, r2, 500);
  EXPECT_EQ(report_json(a.report(17, 1e-3)), report_json(b.report(17, 1e-3)));
  EXPECT_EQ(report_csv_row(a.report(17, 1e-3)), report_csv_row(b.report(17, 1e-3)));
}

TEST(PeakPower, SingleWindowAndOverlap) {
  CostLedger l(CostParams{}, 1);
  // 1 nJ over 30 ns in window [0, 30)
  l.charge(EventKind::kLineRead, 1e-9 / 0.84e-12, 0.0, 30.0);
  auto peaks = peak_power(l.events(), 1, 30.0);
  EXPECT_NEAR(peaks[0], 1e-9 / 30e-9 * 1e-9 / 1e-9, 1e-9);
  // Overlapping event doubles the power in the window.
  l.charge(EventKind::kLineRead, 1e-9 / 0.84e-12, 0.0, 30.0);
  peaks = peak_power(l.events(), 1, 30.0);
  EXPECT_NEAR(peaks[0], 2 * 1e-9 / 30e-9 * 1e-9 / 1e-9, 1e-9);
}

TEST(PeakPower, AttributedPerChip) {
  CostLedger l(CostParams{}, 8);
  l.charge(EventKind::kLogicCycle, 1000.0, 0.0, 30.0, 2, 1);
  const auto peaks = peak_power(l.events(), 8, 30.0);
  for (std::uint32_t c = 0; c < 8; ++c) {
    if (c == 2) {
      EXPECT_NEAR(peaks[c], 1000 * 81.6e-15 / 30e-9 * 1e-9 * 1e9, 1e-12);
    } else {
      EXPECT_EQ(peaks[c], 0.0);
    }
  }
}

TEST(PeakPower, WindowAveragesShortBursts) {
  CostLedger l(CostParams{}, 1);
  l.charge(EventKind::kLineRead, 1000.0, 0.0, 3.0);
  const auto peaks = peak_power(l.events(), 1, 30.0);
  EXPECT_NEAR(peaks[0], 1000 * 0.84e-12 / 30e-9, 1e-12);
}

TEST(Report, EndurancePopulated) {
  CostLedger l;
  l.charge(EventKind::kLineRead, 512, 0, 60);
  const auto r = l.report(512, 1.0);
  EXPECT_EQ(r.required_endurance_10y, 3.1536e8);
  EXPECT_EQ(r.peak_power.size(), 8u);
  EXPECT_NE(report_csv_header().find("required_endurance_10y"), std::string::npos);
  EXPECT_NE(report_csv_units().find("writes/cell"), std::string::npos);
}
