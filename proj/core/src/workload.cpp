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

#include "pimolap/workload.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <nlohmann/json.hpp>
#include <numeric>

#include "pimolap/errors.hpp"
#include "pimolap/relation_io.hpp"

namespace pimolap::workload {

namespace {

constexpr std::uint64_t kDays = 2557;  // 1992-01-01 .. 1998-12-31
constexpr std::uint64_t kFirstYear = 1992;
constexpr std::uint64_t kYears = 7;

struct Nation {
  const char* name;
  const char* region;
};

constexpr Nation kNations[] = {
    {"ALGERIA", "AFRICA"},       {"ARGENTINA", "AMERICA"},     {"BRAZIL", "AMERICA"},
    {"CANADA", "AMERICA"},       {"EGYPT", "MIDDLE EAST"},     {"ETHIOPIA", "AFRICA"},
    {"FRANCE", "EUROPE"},        {"GERMANY", "EUROPE"},        {"INDIA", "ASIA"},
    {"INDONESIA", "ASIA"},       {"IRAN", "MIDDLE EAST"},      {"IRAQ", "MIDDLE EAST"},
    {"JAPAN", "ASIA"},           {"JORDAN", "MIDDLE EAST"},    {"KENYA", "AFRICA"},
    {"MOROCCO", "AFRICA"},       {"MOZAMBIQUE", "AFRICA"},     {"PERU", "AMERICA"},
    {"CHINA", "ASIA"},           {"ROMANIA", "EUROPE"},        {"SAUDI ARABIA", "MIDDLE EAST"},
    {"VIETNAM", "ASIA"},         {"RUSSIA", "EUROPE"},         {"UNITED KINGDOM", "EUROPE"},
    {"UNITED STATES", "AMERICA"},
};

constexpr const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                   "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

std::string city_name(const std::string& nation, int digit) {
  std::string prefix = nation.substr(0, 9);
  prefix.resize(9, ' ');
  return prefix + std::to_string(digit);
}

std::string two_digits(unsigned v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02u", v);
  return buf;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::uint64_t code_in(const std::vector<std::string>& dict, const std::string& value) {
  auto it = std::lower_bound(dict.begin(), dict.end(), value);
  if (it == dict.end() || *it != value) throw Error("internal: '" + value + "' missing from dictionary");
  return static_cast<std::uint64_t>(it - dict.begin());
}

// Dictionaries shared by the generator, schema and templates.
struct Dicts {
  std::vector<std::string> regions;
  std::vector<std::string> nations;
  std::vector<std::string> cities;
  std::vector<std::string> segments;
  std::vector<std::string> mfgrs;
  std::vector<std::string> categories;
  std::vector<std::string> brands;
  std::vector<std::string> yearmonths;
  std::vector<std::uint64_t> city_nation;
  std::vector<std::uint64_t> nation_region;
  std::vector<std::uint64_t> brand_category;
  std::vector<std::uint64_t> category_mfgr;

  Dicts() {
    std::vector<std::string> r;
    std::vector<std::string> n;
    std::vector<std::string> c;
    for (const auto& nat : kNations) {
      r.emplace_back(nat.region);
      n.emplace_back(nat.name);
      for (int d = 0; d < 10; ++d) c.push_back(city_name(nat.name, d));
    }
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    regions = r;
    nations = sorted(n);
    cities = sorted(c);
    segments = {"AUTOMOBILE", "BUILDING", "FURNITURE", "HOUSEHOLD", "MACHINERY"};
    std::vector<std::string> m;
    std::vector<std::string> cat;
    std::vector<std::string> b;
    for (unsigned i = 1; i <= 5; ++i) {
      m.push_back("MFGR#" + std::to_string(i));
      for (unsigned j = 1; j <= 5; ++j) {
        cat.push_back("MFGR#" + std::to_string(i) + std::to_string(j));
        for (unsigned k = 1; k <= 40; ++k) b.push_back("MFGR#" + std::to_string(i) + std::to_string(j) + two_digits(k));
      }
    }
    mfgrs = sorted(m);
    categories = sorted(cat);
    brands = sorted(b);
    std::vector<std::string> ym;
    for (std::uint64_t y = kFirstYear; y < kFirstYear + kYears; ++y) {
      for (const auto* mo : kMonths) ym.push_back(mo + std::to_string(y));
    }
    yearmonths = sorted(ym);

    city_nation.resize(cities.size());
    for (const auto& nat : kNations) {
      for (int d = 0; d < 10; ++d) city_nation[code_in(cities, city_name(nat.name, d))] = code_in(nations, nat.name);
    }
    nation_region.resize(nations.size());
    for (const auto& nat : kNations) nation_region[code_in(nations, nat.name)] = code_in(regions, nat.region);
    brand_category.resize(brands.size());
    for (std::size_t i = 0; i < brands.size(); ++i) brand_category[i] = code_in(categories, brands[i].substr(0, 7));
    category_mfgr.resize(categories.size());
    for (std::size_t i = 0; i < categories.size(); ++i) category_mfgr[i] = code_in(mfgrs, categories[i].substr(0, 6));
  }
};

const Dicts& dicts() {
  static const Dicts d;
  return d;
}

std::vector<std::uint64_t> iota_codes(std::size_t n, std::uint64_t first = 0) {
  std::vector<std::uint64_t> v(n);
  std::iota(v.begin(), v.end(), first);
  return v;
}

Attribute integer(std::string name, std::uint32_t width, std::string origin = "fact") {
  Attribute a;
  a.name = std::move(name);
  a.width_bits = width;
  a.origin = std::move(origin);
  return a;
}

Attribute categorical(std::string name, std::string origin, const std::vector<std::string>& dict,
                      std::string parent = {}, std::vector<std::uint64_t> parent_codes = {}) {
  Attribute a;
  a.name = std::move(name);
  a.kind = AttrKind::kCategorical;
  a.origin = std::move(origin);
  a.dictionary = dict;
  a.width_bits = std::max(1, static_cast<int>(std::bit_width(dict.size() - 1)));
  a.domain = iota_codes(dict.size());
  a.parent = std::move(parent);
  a.parent_codes = std::move(parent_codes);
  return a;
}

struct Calendar {
  std::uint64_t year;
  unsigned month;
  std::uint64_t week;
};

Calendar calendar(std::uint64_t day) {
  using namespace std::chrono;
  const sys_days d = sys_days{year{1992} / 1 / 1} + days{static_cast<long>(day)};
  const year_month_day ymd{d};
  const auto jan1 = sys_days{ymd.year() / 1 / 1};
  const auto doy = static_cast<std::uint64_t>((d - jan1).count());
  return {static_cast<std::uint64_t>(static_cast<int>(ymd.year())), static_cast<unsigned>(ymd.month()), doy / 7 + 1};
}

}  // namespace

std::uint64_t WorkloadSpec::fact_rows() const {
  return static_cast<std::uint64_t>(std::llround(scale_factor * static_cast<double>(base_rows)));
}

void WorkloadSpec::validate() const {
  if (!(scale_factor > 0) || !std::isfinite(scale_factor)) throw InvalidArgumentError("scale factor must be positive");
  if (base_rows == 0) throw InvalidArgumentError("base rows must be positive");
  if (fact_rows() == 0) throw InvalidArgumentError("scale factor yields no fact rows");
  for (double s : {customer_skew, supplier_skew, part_skew}) {
    if (!(s >= 0) || !std::isfinite(s)) throw InvalidArgumentError("skew exponents must be non-negative");
  }
}

std::uint64_t Rng::between(std::uint64_t lo, std::uint64_t hi) {
  if (hi < lo) throw InvalidArgumentError("empty range");
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return next();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  while (true) {
    const auto r = next();
    if (r < limit) return lo + r % span;
  }
}

Zipf::Zipf(std::size_t n, double exponent, Rng& rng) {
  if (n == 0) throw InvalidArgumentError("Zipf over an empty set");
  cdf_.resize(n);
  double acc = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    cdf_[r] = acc;
  }
  for (auto& c : cdf_) c /= acc;
  rank_to_item_.resize(n);
  std::iota(rank_to_item_.begin(), rank_to_item_.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) std::swap(rank_to_item_[i], rank_to_item_[rng.between(0, i)]);
  item_to_rank_.resize(n);
  for (std::size_t r = 0; r < n; ++r) item_to_rank_[rank_to_item_[r]] = r;
}

std::size_t Zipf::operator()(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto rank = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  return rank_to_item_[rank];
}

double Zipf::probability(std::size_t item) const {
  const auto r = item_to_rank_.at(item);
  return r == 0 ? cdf_[0] : cdf_[r] - cdf_[r - 1];
}

Schema ssb_schema() {
  const auto& d = dicts();
  Schema s;
  auto& a = s.attributes;
  Attribute orderdate = integer("lo_orderdate", 12);
  orderdate.kind = AttrKind::kDate;
  a.push_back(orderdate);
  a.push_back(integer("lo_quantity", 6));
  a.push_back(integer("lo_extendedprice", 17));
  a.push_back(integer("lo_discount", 4));
  a.push_back(integer("lo_revenue", 17));
  a.push_back(integer("lo_supplycost", 17));
  for (const char* who : {"c", "s"}) {
    const std::string origin = who[0] == 'c' ? "customer" : "supplier";
    const std::string p = who;
    a.push_back(categorical(p + "_city", origin, d.cities, p + "_nation", d.city_nation));
    a.push_back(categorical(p + "_nation", origin, d.nations, p + "_region", d.nation_region));
    a.push_back(categorical(p + "_region", origin, d.regions));
    if (p == "c") a.push_back(categorical("c_mktsegment", origin, d.segments));
  }
  a.push_back(categorical("p_mfgr", "part", d.mfgrs));
  a.push_back(categorical("p_category", "part", d.categories, "p_mfgr", d.category_mfgr));
  a.push_back(categorical("p_brand1", "part", d.brands, "p_category", d.brand_category));
  Attribute size = integer("p_size", 6, "part");
  size.domain = iota_codes(50, 1);
  a.push_back(size);

  Attribute year = integer("d_year", 11, "date");
  year.domain = iota_codes(kYears, kFirstYear);
  a.push_back(year);
  Attribute ymnum = integer("d_yearmonthnum", 18, "date");
  ymnum.parent = "d_year";
  for (std::uint64_t y = kFirstYear; y < kFirstYear + kYears; ++y) {
    for (std::uint64_t m = 1; m <= 12; ++m) {
      ymnum.domain.push_back(y * 100 + m);
      ymnum.parent_codes.push_back(y);
    }
  }
  a.push_back(ymnum);
  std::vector<std::uint64_t> ym_year;
  for (const auto& ym : d.yearmonths) ym_year.push_back(std::stoull(ym.substr(3)));
  a.push_back(categorical("d_yearmonth", "date", d.yearmonths, "d_year", ym_year));
  Attribute week = integer("d_weeknuminyear", 6, "date");
  week.domain = iota_codes(53, 1);
  a.push_back(week);
  s.validate();
  return s;
}

Relation generate(const WorkloadSpec& spec) {
  spec.validate();
  const auto& d = dicts();
  Rng rng(spec.seed);
  const double sf = spec.scale_factor;
  const auto n_cust = std::max<std::uint64_t>(static_cast<std::uint64_t>(std::llround(sf * 30000)), 1000);
  const auto n_supp = std::max<std::uint64_t>(static_cast<std::uint64_t>(std::llround(sf * 2000)), 1000);
  const auto n_part = std::max<std::uint64_t>(static_cast<std::uint64_t>(std::llround(sf * 200000)), 2000);

  const Zipf cust_city(d.cities.size(), spec.customer_skew, rng);
  const Zipf cust_segment(d.segments.size(), spec.customer_skew, rng);
  const Zipf supp_city(d.cities.size(), spec.supplier_skew, rng);
  const Zipf part_brand(d.brands.size(), spec.part_skew, rng);

  std::vector<std::uint64_t> c_city(n_cust);
  std::vector<std::uint64_t> c_seg(n_cust);
  for (std::uint64_t i = 0; i < n_cust; ++i) {
    c_city[i] = cust_city(rng);
    c_seg[i] = cust_segment(rng);
  }
  std::vector<std::uint64_t> s_city(n_supp);
  for (auto& v : s_city) v = supp_city(rng);
  std::vector<std::uint64_t> p_brand(n_part);
  std::vector<std::uint64_t> p_size(n_part);
  std::vector<std::uint64_t> p_price(n_part);
  for (std::uint64_t i = 0; i < n_part; ++i) {
    p_brand[i] = part_brand(rng);
    p_size[i] = rng.between(1, 50);
    const std::uint64_t key = i + 1;
    p_price[i] = (90000 + (key / 10) % 20001 + 100 * (key % 1000)) / 100;
  }

  Relation rel;
  rel.schema = ssb_schema();
  const auto n = spec.fact_rows();
  rel.columns.assign(rel.schema.attributes.size(), std::vector<std::uint64_t>(n));
  auto col = [&](const char* name) -> std::vector<std::uint64_t>& { return rel.column(name); };
  auto& lo_orderdate = col("lo_orderdate");
  auto& lo_quantity = col("lo_quantity");
  auto& lo_ext = col("lo_extendedprice");
  auto& lo_discount = col("lo_discount");
  auto& lo_revenue = col("lo_revenue");
  auto& lo_supplycost = col("lo_supplycost");
  auto& cc = col("c_city");
  auto& cn = col("c_nation");
  auto& cr = col("c_region");
  auto& cs = col("c_mktsegment");
  auto& sc = col("s_city");
  auto& sn = col("s_nation");
  auto& sr = col("s_region");
  auto& pm = col("p_mfgr");
  auto& pc = col("p_category");
  auto& pb = col("p_brand1");
  auto& ps = col("p_size");
  auto& dy = col("d_year");
  auto& dymn = col("d_yearmonthnum");
  auto& dym = col("d_yearmonth");
  auto& dw = col("d_weeknuminyear");

  std::vector<Calendar> cal(kDays);
  std::vector<std::uint64_t> ym_code(kDays);
  for (std::uint64_t day = 0; day < kDays; ++day) {
    cal[day] = calendar(day);
    ym_code[day] = code_in(d.yearmonths, std::string(kMonths[cal[day].month - 1]) + std::to_string(cal[day].year));
  }

  for (std::uint64_t r = 0; r < n; ++r) {
    const auto ck = rng.between(0, n_cust - 1);
    const auto sk = rng.between(0, n_supp - 1);
    const auto pk = rng.between(0, n_part - 1);
    const auto day = rng.between(0, kDays - 1);
    const auto qty = rng.between(1, 50);
    const auto disc = rng.between(0, 10);
    lo_orderdate[r] = day;
    lo_quantity[r] = qty;
    lo_discount[r] = disc;
    lo_ext[r] = qty * p_price[pk];
    lo_revenue[r] = lo_ext[r] * (100 - disc) / 100;
    lo_supplycost[r] = p_price[pk] * 6 / 10;
    cc[r] = c_city[ck];
    cn[r] = d.city_nation[cc[r]];
    cr[r] = d.nation_region[cn[r]];
    cs[r] = c_seg[ck];
    sc[r] = s_city[sk];
    sn[r] = d.city_nation[sc[r]];
    sr[r] = d.nation_region[sn[r]];
    pb[r] = p_brand[pk];
    pc[r] = d.brand_category[pb[r]];
    pm[r] = d.category_mfgr[pc[r]];
    ps[r] = p_size[pk];
    dy[r] = cal[day].year;
    dymn[r] = cal[day].year * 100 + cal[day].month;
    dym[r] = ym_code[day];
    dw[r] = cal[day].week;
  }
  rel.validate();
  return rel;
}

namespace {

Predicate eq(const std::string& attr, Literal v) { return Predicate::compare(attr, CmpOp::kEq, {std::move(v)}); }
Predicate lt(const std::string& attr, Literal v) { return Predicate::compare(attr, CmpOp::kLt, {std::move(v)}); }
Predicate le(const std::string& attr, Literal v) { return Predicate::compare(attr, CmpOp::kLe, {std::move(v)}); }
Predicate between(const std::string& attr, Literal lo, Literal hi) {
  return Predicate::compare(attr, CmpOp::kBetween, {std::move(lo), std::move(hi)});
}
Predicate in(const std::string& attr, std::vector<Literal> v) { return Predicate::compare(attr, CmpOp::kIn, std::move(v)); }
Predicate all(std::vector<Predicate> v) { return Predicate::all_of(std::move(v)); }

std::string region_of(const std::string& nation) {
  for (const auto& n : kNations) {
    if (nation == n.name) return n.region;
  }
  return {};
}

}  // namespace

std::vector<QueryTemplate> templates() {
  const auto& d = dicts();
  std::vector<QueryTemplate> out;
  auto add = [&](std::string id, double target, std::string agg, std::vector<std::string> gb) -> QueryTemplate& {
    out.push_back({std::move(id), target, std::move(agg), std::move(gb), {}});
    return out.back();
  };
  const std::uint64_t last_year = kFirstYear + kYears - 1;

  auto& q11 = add("q1.1", 2.3e-2, "lo_extendedprice", {});
  for (std::uint64_t y = kFirstYear; y <= last_year; ++y) {
    q11.candidates.push_back(all({eq("d_year", y), between("lo_discount", 1, 3), lt("lo_quantity", 25)}));
  }
  auto& q12 = add("q1.2", 6.6e-4, "lo_extendedprice", {});
  for (std::uint64_t y = kFirstYear; y <= last_year; ++y) {
    for (std::uint64_t m = 1; m <= 12; ++m) {
      q12.candidates.push_back(
          all({eq("d_yearmonthnum", y * 100 + m), between("lo_discount", 4, 6), between("lo_quantity", 26, 35)}));
    }
  }
  auto& q13 = add("q1.3", 8.4e-5, "lo_extendedprice", {});
  for (std::uint64_t y = kFirstYear; y <= last_year; ++y) {
    for (std::uint64_t w = 1; w <= 53; ++w) {
      q13.candidates.push_back(all({eq("d_weeknuminyear", w), eq("d_year", y), between("lo_discount", 5, 7),
                                    between("lo_quantity", 26, 35)}));
    }
  }

  auto& q21 = add("q2.1", 1.2e-2, "lo_revenue", {"d_year", "p_brand1"});
  for (const auto& c : d.categories) {
    for (const auto& r : d.regions) q21.candidates.push_back(all({eq("p_category", c), eq("s_region", r)}));
  }
  auto& q22 = add("q2.2", 1.6e-3, "lo_revenue", {"d_year", "p_brand1"});
  for (const auto& c : d.categories) {
    for (unsigned first = 1; first + 7 <= 40; first += 4) {
      for (const auto& r : d.regions) {
        q22.candidates.push_back(
            all({between("p_brand1", c + two_digits(first), c + two_digits(first + 7)), eq("s_region", r)}));
      }
    }
  }
  auto& q23 = add("q2.3", 2e-4, "lo_revenue", {"d_year", "p_brand1"});
  for (const auto& c : d.categories) {
    for (unsigned b : {1u, 9u, 17u, 25u, 33u, 39u}) {
      for (const auto& r : d.regions) q23.candidates.push_back(all({eq("p_brand1", c + two_digits(b)), eq("s_region", r)}));
    }
  }

  auto& q31 = add("q3.1", 3.4e-2, "lo_revenue", {"c_nation", "s_nation", "d_year"});
  for (const auto& r : d.regions) {
    q31.candidates.push_back(all({eq("c_region", r), eq("s_region", r), between("d_year", 1992, 1997)}));
  }
  auto& q32 = add("q3.2", 1.3e-3, "lo_revenue", {"c_city", "s_city", "d_year"});
  for (const auto& n : d.nations) {
    q32.candidates.push_back(all({eq("c_nation", n), eq("s_nation", n), between("d_year", 1992, 1997)}));
  }
  add("q3.3", 4.7e-5, "lo_revenue", {"c_city", "s_city", "d_year"});
  add("q3.4", 6.6e-7, "lo_revenue", {"c_city", "s_city", "d_year"});
  for (const auto& n : d.nations) {
    for (int digit = 0; digit < 10; ++digit) {
      const std::vector<Literal> pair = {city_name(n, digit), city_name(n, (digit + 4) % 10)};
      out[out.size() - 2].candidates.push_back(
          all({in("c_city", pair), in("s_city", pair), between("d_year", 1992, 1997)}));
      out.back().candidates.push_back(all({in("c_city", pair), in("s_city", pair), eq("d_yearmonth", "Dec1997")}));
    }
  }

  auto& q41 = add("q4.1", 2e-2, "lo_revenue", {"d_year", "c_nation"});
  for (const auto& r : d.regions) {
    for (unsigned m = 1; m <= 4; ++m) {
      q41.candidates.push_back(all({eq("c_region", r), eq("s_region", r),
                                    in("p_mfgr", {"MFGR#" + std::to_string(m), "MFGR#" + std::to_string(m + 1)})}));
    }
  }
  auto& q42 = add("q4.2", 2.3e-3, "lo_revenue", {"d_year", "s_nation", "p_category"});
  for (const auto& r : d.regions) {
    for (unsigned m = 1; m <= 5; ++m) {
      q42.candidates.push_back(all({eq("c_region", r), eq("s_region", r), in("d_year", {1997, 1998}),
                                    eq("p_mfgr", "MFGR#" + std::to_string(m))}));
    }
  }
  auto& q43 = add("q4.3", 9.1e-5, "lo_revenue", {"d_year", "s_city", "p_brand1"});
  for (const auto& n : d.nations) {
    for (const auto& c : d.categories) {
      q43.candidates.push_back(all({eq("c_region", region_of(n)), eq("s_nation", n), in("d_year", {1997, 1998}),
                                    eq("p_category", c)}));
    }
  }
  return out;
}

const QueryTemplate& find_template(const std::vector<QueryTemplate>& all_templates, const std::string& id) {
  for (const auto& t : all_templates) {
    if (t.id == id) return t;
  }
  throw InvalidArgumentError("unknown query template '" + id + "'");
}

Instantiation instantiate_query(const QueryTemplate& tmpl, const Relation& relation) {
  if (tmpl.candidates.empty()) throw InvalidArgumentError("template " + tmpl.id + " has no candidates");
  const auto& schema = relation.schema;
  const auto n = relation.rows();
  const double target = tmpl.target_selectivity * static_cast<double>(n);

  std::set<std::size_t> involved;
  for (const auto& c : tmpl.candidates) {
    for (const auto& a : c.attributes()) involved.insert(schema.index_of(a));
  }
  const std::vector<std::size_t> cols(involved.begin(), involved.end());
  std::map<std::vector<std::uint64_t>, std::uint64_t> hist;
  std::vector<std::uint64_t> tuple(cols.size());
  for (std::uint64_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) tuple[i] = relation.columns[cols[i]][r];
    ++hist[tuple];
  }

  std::vector<std::uint64_t> codes(schema.attributes.size(), 0);
  auto count = [&](const Predicate& bound) {
    std::uint64_t total = 0;
    for (const auto& [t, c] : hist) {
      for (std::size_t i = 0; i < cols.size(); ++i) codes[cols[i]] = t[i];
      if (evaluate(bound, codes)) total += c;
    }
    return total;
  };

  std::size_t best = 0;
  std::uint64_t best_count = 0;
  bool have_above = false;
  for (std::size_t i = 0; i < tmpl.candidates.size(); ++i) {
    const auto c = count(bind(tmpl.candidates[i], schema));
    const bool above = static_cast<double>(c) >= target;
    if (above && (!have_above || c < best_count)) {
      best = i;
      best_count = c;
      have_above = true;
    } else if (!have_above && c > best_count) {
      best = i;
      best_count = c;
    }
  }

  Instantiation inst;
  inst.base_selectivity = n ? static_cast<double>(best_count) / static_cast<double>(n) : 0.0;
  Predicate where = tmpl.candidates[best];

  if (static_cast<double>(best_count) > target && target > 0) {
    const auto bound = bind(where, schema);
    const auto& cost = relation.column("lo_supplycost");
    std::vector<std::uint64_t> values;
    for (std::uint64_t r = 0; r < n; ++r) {
      if (evaluate(bound, relation, r)) values.push_back(cost[r]);
    }
    std::sort(values.begin(), values.end());
    std::uint64_t cap = values.back();
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
      const double err = std::abs(std::log(static_cast<double>(i + 1) / target));
      if (err < best_err) {
        best_err = err;
        cap = values[i];
      }
    }
    if (cap < values.back()) where = all({where, le("lo_supplycost", cap)});
  }

  inst.query.name = tmpl.id;
  inst.query.target_selectivity = tmpl.target_selectivity;
  inst.query.where = where;
  inst.query.agg = {fabric::AggOp::kSum, tmpl.aggregate};
  inst.query.group_by = tmpl.group_by;

  const auto bound = bind(where, schema);
  for (std::uint64_t r = 0; r < n; ++r) inst.selected += evaluate(bound, relation, r);
  inst.achieved_selectivity = n ? static_cast<double>(inst.selected) / static_cast<double>(n) : 0.0;
  inst.degenerate = inst.selected == 0;
  return inst;
}

std::vector<Instantiation> generate_to(const WorkloadSpec& spec, const std::filesystem::path& dir) {
  const auto relation = generate(spec);
  save_relation(relation, dir / "relation");
  std::filesystem::create_directories(dir / "queries");
  std::vector<Instantiation> out;
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& t : templates()) {
    auto inst = instantiate_query(t, relation);
    char buf[160];
    std::snprintf(buf, sizeof buf, "# selected %llu of %llu records (%.3g, base %.3g)%s\n",
                  static_cast<unsigned long long>(inst.selected), static_cast<unsigned long long>(relation.rows()),
                  inst.achieved_selectivity, inst.base_selectivity, inst.degenerate ? " degenerate" : "");
    std::ofstream q(dir / "queries" / (t.id + ".qry"), std::ios::trunc);
    q << buf << inst.query.to_text();
    if (!q) throw Error("cannot write query file for " + t.id);
    queries.push_back({{"id", t.id},
                       {"target_selectivity", t.target_selectivity},
                       {"base_selectivity", inst.base_selectivity},
                       {"achieved_selectivity", inst.achieved_selectivity},
                       {"selected", inst.selected},
                       {"degenerate", inst.degenerate}});
    out.push_back(std::move(inst));
  }
  nlohmann::json wl = {{"scale_factor", spec.scale_factor}, {"base_rows", spec.base_rows},
                       {"fact_rows", relation.rows()},      {"customer_skew", spec.customer_skew},
                       {"supplier_skew", spec.supplier_skew}, {"part_skew", spec.part_skew},
                       {"seed", spec.seed},                 {"queries", queries}};
  std::ofstream w(dir / "workload.json", std::ios::trunc);
  w << wl.dump(1) << '\n';
  if (!w) throw Error("cannot write workload.json");
  return out;
}

}  // namespace pimolap::workload
