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

#include "pimolap/relation_io.hpp"

#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "pimolap/errors.hpp"

namespace pimolap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "pimolap-relation";
constexpr int kVersion = 1;

std::uint32_t value_bytes(const Attribute& a) { return (a.width_bits + 7) / 8; }

std::string column_file(const Attribute& a) { return a.name + ".col"; }

}  // namespace

void save_relation(const Relation& relation, const fs::path& dir) {
  relation.validate();
  fs::create_directories(dir);
  json attrs = json::array();
  for (std::size_t i = 0; i < relation.schema.attributes.size(); ++i) {
    const auto& a = relation.schema.attributes[i];
    json ja = {{"name", a.name},         {"width_bits", a.width_bits}, {"kind", to_string(a.kind)},
               {"origin", a.origin},     {"file", column_file(a)},     {"bytes_per_value", value_bytes(a)},
               {"domain", a.domain}};
    if (!a.dictionary.empty()) ja["dictionary"] = a.dictionary;
    if (!a.parent.empty()) {
      ja["parent"] = a.parent;
      ja["parent_codes"] = a.parent_codes;
    }
    attrs.push_back(std::move(ja));

    std::string bytes;
    const auto nb = value_bytes(a);
    bytes.reserve(relation.rows() * nb);
    for (auto v : relation.columns[i]) {
      for (std::uint32_t b = 0; b < nb; ++b) bytes.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
    }
    std::ofstream out(dir / column_file(a), std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write " + (dir / column_file(a)).string());
  }
  json manifest = {{"format", kFormat}, {"version", kVersion}, {"records", relation.rows()}, {"attributes", attrs}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(1) << '\n';
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
}

Relation load_relation(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError("no manifest.json in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest: " + std::string(e.what()));
  }
  Relation rel;
  try {
    if (manifest.at("format") != kFormat) throw FormatError("not a relation manifest");
    if (manifest.at("version").get<int>() != kVersion) throw FormatError("unsupported manifest version");
    const auto records = manifest.at("records").get<std::uint64_t>();
    for (const auto& ja : manifest.at("attributes")) {
      Attribute a;
      a.name = ja.at("name").get<std::string>();
      a.width_bits = ja.at("width_bits").get<std::uint32_t>();
      a.kind = attr_kind_from_string(ja.at("kind").get<std::string>());
      a.origin = ja.at("origin").get<std::string>();
      a.domain = ja.at("domain").get<std::vector<std::uint64_t>>();
      if (ja.contains("dictionary")) a.dictionary = ja["dictionary"].get<std::vector<std::string>>();
      if (ja.contains("parent")) {
        a.parent = ja["parent"].get<std::string>();
        a.parent_codes = ja.at("parent_codes").get<std::vector<std::uint64_t>>();
      }
      const auto nb = ja.at("bytes_per_value").get<std::uint32_t>();
      if (nb != value_bytes(a)) throw FormatError("bad value size for '" + a.name + "'");
      const auto path = dir / ja.at("file").get<std::string>();
      std::ifstream col(path, std::ios::binary);
      if (!col) throw FormatError("missing column file " + path.string());
      std::string bytes((std::istreambuf_iterator<char>(col)), std::istreambuf_iterator<char>());
      if (bytes.size() != records * nb) throw FormatError("column file " + path.string() + " has wrong size");
      std::vector<std::uint64_t> values(records);
      for (std::uint64_t r = 0; r < records; ++r) {
        std::uint64_t v = 0;
        for (std::uint32_t b = 0; b < nb; ++b) {
          v |= std::uint64_t{static_cast<unsigned char>(bytes[r * nb + b])} << (8 * b);
        }
        values[r] = v;
      }
      rel.schema.attributes.push_back(std::move(a));
      rel.columns.push_back(std::move(values));
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest: " + std::string(e.what()));
  }
  rel.validate();
  return rel;
}

}  // namespace pimolap
