/*
 *   Copyright 2026 The d4m-cpp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "d4m/key.hpp"

// Tab-separated triple text: one "row\tcol\tval" per line. Tab, newline and
// backslash inside fields are written as \t, \n and \\. Numbers use the
// shortest round-trip decimal form.
//
// Reading types keys as text. Values are read as numbers when every value
// field of the stream parses as a finite decimal, otherwise all are text.

namespace d4m {

std::string escape_field(std::string_view raw);
std::string unescape_field(std::string_view escaped);

void write_triples(std::ostream& os, std::span<const Triple> triples);
std::vector<Triple> read_triples(std::istream& is);

void write_triples_file(const std::filesystem::path& path, std::span<const Triple> triples);
std::vector<Triple> read_triples_file(const std::filesystem::path& path);

}  // namespace d4m
