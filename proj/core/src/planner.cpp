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

#include "pimolap/planner.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "pimolap/errors.hpp"

namespace pimolap::planner {

using nlohmann::json;

const SqrtFit& ModelTables::host_fit(std::uint32_t s) const {
  auto it = host.find(s);
  if (it == host.end()) throw ModelError("no host-gb model for reads_per_record=" + std::to_string(s));
  return it->second;
}

const LinearFit& ModelTables::pim_fit(device::AggEngine engine, std::uint32_t n) const {
  const auto& t = pim(engine);
  auto it = t.find(n);
  if (it == t.end()) {
    throw ModelError(std::string("no ") + (engine == device::AggEngine::kAlu ? "alu" : "logic") +
                     " pim-gb model for granules=" + std::to_string(n));
  }
  return it->second;
}

double ModelTables::host_latency(std::uint32_t s, double pages, double r) const {
  const auto& f = host_fit(s);
  return pages * (f.a * std::sqrt(std::max(r, 0.0)) + f.b);
}

double ModelTables::pim_latency(device::AggEngine engine, std::uint32_t n, double pages) const {
  const auto& f = pim_fit(engine, n);
  return f.slope * pages + f.intercept;
}

namespace {

json linear_json(const std::map<std::uint32_t, LinearFit>& m) {
  json out = json::object();
  for (const auto& [n, f] : m) out[std::to_string(n)] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
  return out;
}

std::map<std::uint32_t, LinearFit> linear_from(const json& j) {
  std::map<std::uint32_t, LinearFit> m;
  for (const auto& [k, v] : j.items()) {
    m[static_cast<std::uint32_t>(std::stoul(k))] = {v.at("slope").get<double>(), v.at("intercept").get<double>(),
                                                    v.value("r2", 1.0)};
  }
  return m;
}

}  // namespace

std::string ModelTables::to_json() const {
  json h = json::object();
  for (const auto& [s, f] : host) h[std::to_string(s)] = {{"a", f.a}, {"b", f.b}, {"r2", f.r2}};
  json j = {{"layout", layout}, {"units", "ns"}, {"host", h}, {"pim_alu", linear_json(pim_alu)},
            {"pim_logic", linear_json(pim_logic)}};
  return j.dump(1);
}

ModelTables ModelTables::from_json(const std::string& text) {
  ModelTables t;
  try {
    const auto j = json::parse(text);
    t.layout = j.value("layout", "");
    for (const auto& [k, v] : j.at("host").items()) {
      t.host[static_cast<std::uint32_t>(std::stoul(k))] = {v.at("a").get<double>(), v.at("b").get<double>(),
                                                           v.value("r2", 1.0)};
    }
    t.pim_alu = linear_from(j.at("pim_alu"));
    t.pim_logic = linear_from(j.at("pim_logic"));
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model tables: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ModelError(std::string("malformed model tables: ") + e.what());
  }
  for (const auto& [s, f] : t.host) {
    if (!std::isfinite(f.a) || !std::isfinite(f.b)) throw ModelError("non-finite host model entry");
  }
  return t;
}

void ModelTables::save(const std::filesystem::path& path) const {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::trunc);
  out << to_json() << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

ModelTables ModelTables::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("no model tables at " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

namespace {

// Fits y = c0 * x + c1; returns {c0, c1, r2}.
std::array<double, 3> least_squares(const std::vector<double>& x, const std::vector<double>& y,
                                    const std::string& what) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = x[static_cast<std::size_t>(i)];
    a(i, 1) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 2) throw ModelError("rank-deficient measurement grid for " + what);
  const Eigen::VectorXd c = qr.solve(b);
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (a * c - b).squaredNorm();
  const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res <= 1e-18 * std::max(1.0, mean * mean) ? 1.0 : 0.0);
  return {c(0), c(1), r2};
}

}  // namespace

std::map<std::uint32_t, SqrtFit> fit_host(const std::vector<HostSample>& samples) {
  std::map<std::uint32_t, std::vector<const HostSample*>> by_s;
  for (const auto& s : samples) by_s[s.reads_per_record].push_back(&s);
  std::map<std::uint32_t, SqrtFit> out;
  for (const auto& [s, pts] : by_s) {
    std::set<double> ms;
    std::set<double> rs;
    std::vector<double> x;
    std::vector<double> y;
    for (const auto* p : pts) {
      if (p->pages <= 0 || p->r < 0) throw ModelError("host sample with non-positive M or negative r");
      ms.insert(p->pages);
      rs.insert(p->r);
      x.push_back(std::sqrt(p->r));
      y.push_back(p->latency_ns / p->pages);
    }
    if (ms.size() < 3 || rs.size() < 5) {
      throw ModelError("host-gb grid for s=" + std::to_string(s) + " needs >=3 values of M and >=5 of r");
    }
    const auto c = least_squares(x, y, "host-gb s=" + std::to_string(s));
    out[s] = {c[0], c[1], c[2]};
  }
  return out;
}

std::map<std::uint32_t, LinearFit> fit_pim(const std::vector<PimSample>& samples) {
  std::map<std::uint32_t, std::vector<const PimSample*>> by_n;
  for (const auto& s : samples) by_n[s.granules].push_back(&s);
  std::map<std::uint32_t, LinearFit> out;
  for (const auto& [n, pts] : by_n) {
    std::set<double> ms;
    std::vector<double> x;
    std::vector<double> y;
    for (const auto* p : pts) {
      ms.insert(p->pages);
      x.push_back(p->pages);
      y.push_back(p->latency_ns);
    }
    if (ms.size() < 3) throw ModelError("pim-gb grid for n=" + std::to_string(n) + " needs >=3 values of M");
    const auto c = least_squares(x, y, "pim-gb n=" + std::to_string(n));
    out[n] = {c[0], c[1], c[2]};
  }
  return out;
}

GroupByPlan plan_groupby(const ModelTables& tables, device::AggEngine engine, std::uint32_t s, std::uint32_t n,
                         double pages, std::uint64_t k_max, const std::function<double(std::uint64_t)>& r) {
  GroupByPlan plan;
  plan.k_max = k_max;
  plan.pages = pages;
  plan.reads_per_record = s;
  plan.granules = n;
  const double per_subgroup = tables.pim_latency(engine, n, pages);
  plan.predicted.resize(k_max + 1);
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    double t = static_cast<double>(k) * per_subgroup;
    if (k < k_max) t += tables.host_latency(s, pages, r(k));
    plan.predicted[k] = t;
    if (t < plan.predicted[plan.k]) plan.k = k;
  }
  return plan;
}

}  // namespace pimolap::planner
