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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "pimolap/errors.hpp"
#include "pimolap/planner.hpp"

using namespace pimolap;
using planner::ModelTables;

namespace {

ModelTables tables_with(double a, double b, double slope, double intercept) {
  ModelTables t;
  t.layout = "one-xb";
  for (std::uint32_t s = 1; s <= 6; ++s) t.host[s] = {a * s, b, 1.0};
  for (std::uint32_t n = 1; n <= 4; ++n) {
    t.pim_alu[n] = {slope * n, intercept, 1.0};
    t.pim_logic[n] = {slope * n * 10, intercept, 1.0};
  }
  return t;
}

// Argmin by direct enumeration of the total-latency expression.
std::uint64_t brute_argmin(double a, double b, double slope, double intercept, double m, std::uint64_t kmax,
                           const std::vector<double>& r) {
  std::uint64_t best = 0;
  double best_t = INFINITY;
  for (std::uint64_t k = 0; k <= kmax; ++k) {
    double t = static_cast<double>(k) * (slope * m + intercept);
    if (k < kmax) t += m * (a * std::sqrt(r[k]) + b);
    if (t < best_t) {
      best_t = t;
      best = k;
    }
  }
  return best;
}

}  // namespace

TEST(FitHost, RecoversExactCoefficients) {
  std::vector<planner::HostSample> samples;
  for (std::uint32_t s = 1; s <= 3; ++s) {
    for (double m : {1.0, 2.0, 4.0, 8.0}) {
      for (double r : {1e-4, 1e-3, 1e-2, 0.1, 0.5}) {
        samples.push_back({s, m, r, m * (1000.0 * s * std::sqrt(r) + 60000.0)});
      }
    }
  }
  const auto fit = planner::fit_host(samples);
  ASSERT_EQ(fit.size(), 3u);
  for (const auto& [s, f] : fit) {
    EXPECT_NEAR(f.a, 1000.0 * s, 1e-9 * 1000.0 * s);
    EXPECT_NEAR(f.b, 60000.0, 1e-9 * 60000.0);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
  }
}

TEST(FitPim, RecoversExactCoefficients) {
  std::vector<planner::PimSample> samples;
  for (std::uint32_t n = 1; n <= 4; ++n) {
    for (double m : {1.0, 2.0, 4.0, 8.0, 16.0}) samples.push_back({n, m, m * 120.0 * n + 31000.0 * n});
  }
  const auto fit = planner::fit_pim(samples);
  for (const auto& [n, f] : fit) {
    EXPECT_NEAR(f.slope, 120.0 * n, 1e-9 * 120.0 * n);
    EXPECT_NEAR(f.intercept, 31000.0 * n, 1e-9 * 31000.0 * n);
  }
}

TEST(Fit, DegenerateGridsThrow) {
  std::vector<planner::HostSample> host;
  for (double m : {1.0, 2.0}) {
    for (double r : {1e-4, 1e-3, 1e-2, 0.1, 0.5}) host.push_back({1, m, r, m});
  }
  EXPECT_THROW(planner::fit_host(host), ModelError);
  host.clear();
  for (double m : {1.0, 2.0, 4.0}) {
    for (double r : {0.1, 0.1, 0.1}) host.push_back({1, m, r, m});
  }
  EXPECT_THROW(planner::fit_host(host), ModelError);
  EXPECT_THROW(planner::fit_pim({{1, 1, 5}, {1, 2, 6}, {1, 2, 7}}), ModelError);
  EXPECT_THROW(planner::fit_host({{1, 0, 0.1, 1}}), ModelError);
}

TEST(ModelTables, MissingEntriesThrow) {
  const auto t = tables_with(1, 1, 1, 1);
  EXPECT_THROW(t.host_fit(7), ModelError);
  EXPECT_THROW(t.pim_fit(device::AggEngine::kAlu, 5), ModelError);
  EXPECT_DOUBLE_EQ(t.host_latency(2, 4, 0.25), 4 * (2 * 0.5 + 1));
  EXPECT_DOUBLE_EQ(t.pim_latency(device::AggEngine::kLogicOnly, 2, 3), 3 * 20 + 1);
}

TEST(ModelTables, JsonRoundTrip) {
  auto t = tables_with(1234.5678, 60001.25, 120.125, 31000.0625);
  t.host[2].r2 = 0.9912345678901234;
  const auto back = ModelTables::from_json(t.to_json());
  EXPECT_EQ(back.layout, t.layout);
  ASSERT_EQ(back.host.size(), t.host.size());
  for (const auto& [s, f] : t.host) {
    EXPECT_EQ(back.host.at(s).a, f.a);
    EXPECT_EQ(back.host.at(s).b, f.b);
    EXPECT_EQ(back.host.at(s).r2, f.r2);
  }
  for (const auto& [n, f] : t.pim_logic) {
    EXPECT_EQ(back.pim_logic.at(n).slope, f.slope);
    EXPECT_EQ(back.pim_logic.at(n).intercept, f.intercept);
  }
  const auto path = std::filesystem::temp_directory_path() / "pimolap_test_models.json";
  t.save(path);
  EXPECT_EQ(ModelTables::load(path).to_json(), t.to_json());
  std::filesystem::remove(path);
  EXPECT_THROW(ModelTables::from_json("{\"layout\": 3}"), Error);
  EXPECT_THROW(ModelTables::load("/nonexistent/models.json"), Error);
}

TEST(PlanGroupBy, FreeHostMeansNoPimSubgroups) {
  const auto t = tables_with(0, 0, 100, 1000);
  const auto plan = planner::plan_groupby(t, device::AggEngine::kAlu, 2, 1, 8, 50, [](std::uint64_t) { return 0.3; });
  EXPECT_EQ(plan.k, 0u);
  EXPECT_EQ(plan.predicted.size(), 51u);
}

TEST(PlanGroupBy, SingleSubgroupCheaperInPim) {
  const auto t = tables_with(1e6, 1e6, 1, 1);
  const auto plan = planner::plan_groupby(t, device::AggEngine::kAlu, 2, 1, 8, 1, [](std::uint64_t k) {
    return k == 0 ? 0.5 : 0.0;
  });
  EXPECT_EQ(plan.k, 1u);
  EXPECT_DOUBLE_EQ(plan.predicted_best(), 8 + 1);
}

TEST(PlanGroupBy, MatchesExhaustiveArgminOnRandomSchedules) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = std::exp(u(rng) * 12);
    const double b = std::exp(u(rng) * 12);
    const double slope = std::exp(u(rng) * 10);
    const double intercept = std::exp(u(rng) * 12);
    const double m = 1 + std::floor(u(rng) * 300);
    const std::uint64_t kmax = 1 + rng() % 400;
    // decreasing r(k) from a random Zipf-like population
    std::vector<double> sizes(kmax);
    for (auto& s : sizes) s = std::pow(u(rng), 4);
    std::sort(sizes.rbegin(), sizes.rend());
    const double total_sel = u(rng) * 0.1;
    double sum = 0;
    for (auto s : sizes) sum += s;
    std::vector<double> r(kmax + 1, 0.0);
    double rest = sum;
    for (std::uint64_t k = 0; k <= kmax; ++k) {
      r[k] = sum > 0 ? std::max(0.0, total_sel * rest / sum) : 0.0;
      if (k < kmax) rest -= sizes[k];
    }
    ModelTables t;
    t.host[3] = {a, b, 1};
    t.pim_alu[2] = {slope, intercept, 1};
    const auto plan =
        planner::plan_groupby(t, device::AggEngine::kAlu, 3, 2, m, kmax, [&](std::uint64_t k) { return r.at(k); });
    EXPECT_EQ(plan.k, brute_argmin(a, b, slope, intercept, m, kmax, r)) << "trial " << trial;
  }
}
