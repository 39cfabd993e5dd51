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

#include "d4m/triple_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "d4m/error.hpp"

namespace d4m {

std::string escape_field(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    char c = escaped[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    if (++i == escaped.size()) throw Error(ErrorCode::ParseError, "dangling backslash in field");
    switch (escaped[i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case '\\': out += '\\'; break;
      default: throw Error(ErrorCode::ParseError, std::string("unknown escape \\") + escaped[i]);
    }
  }
  return out;
}

void write_triples(std::ostream& os, std::span<const Triple> triples) {
  for (const auto& t : triples) {
    os << escape_field(t.row.render()) << '\t' << escape_field(t.col.render()) << '\t'
       << escape_field(t.val.render()) << '\n';
  }
}

namespace {

std::optional<double> parse_number(std::string_view s) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(x)) {
    return std::nullopt;
  }
  return x;
}

}  // namespace

std::vector<Triple> read_triples(std::istream& is) {
  struct Raw {
    std::string row, col, val;
  };
  std::vector<Raw> raws;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
    }
    std::string_view v(line);
    raws.push_back({unescape_field(v.substr(0, t1)), unescape_field(v.substr(t1 + 1, t2 - t1 - 1)),
                    unescape_field(v.substr(t2 + 1))});
  }
  bool numeric = true;
  for (const auto& r : raws) {
    if (!parse_number(r.val)) {
      numeric = false;
      break;
    }
  }
  std::vector<Triple> out;
  out.reserve(raws.size());
  for (auto& r : raws) {
    Value v = numeric ? Value(*parse_number(r.val)) : Value(std::move(r.val));
    out.push_back({Key(std::move(r.row)), Key(std::move(r.col)), std::move(v)});
  }
  return out;
}

void write_triples_file(const std::filesystem::path& path, std::span<const Triple> triples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_triples(os, triples);
  if (!os) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::vector<Triple> read_triples_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  return read_triples(is);
}

}  // namespace d4m
