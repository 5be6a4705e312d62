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

#include <filesystem>

#include "pimolap/schema.hpp"

namespace pimolap {

/// Writes manifest.json plus one little-endian column file per attribute.
/// Values use the smallest whole number of bytes that holds the attribute.
void save_relation(const Relation& relation, const std::filesystem::path& dir);

Relation load_relation(const std::filesystem::path& dir);

}  // namespace pimolap
