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

#include "d4m/selector.hpp"

#include <algorithm>
#include <charconv>

#include "d4m/error.hpp"

namespace d4m {

Selector Selector::list(std::vector<Key> keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return Selector(List{std::move(keys)});
}

Selector Selector::prefix(std::string stem) {
  if (stem.empty()) throw Error(ErrorCode::EmptySelector, "prefix stem must be non-empty");
  return Selector(Prefix{std::move(stem)});
}

Selector Selector::range(Key lo, Key hi) {
  if (hi < lo) throw Error(ErrorCode::MalformedRange, "range lower bound exceeds upper bound");
  return Selector(Range{std::move(lo), std::move(hi)});
}

Selector Selector::positional(std::size_t lo, std::size_t hi) {
  if (lo < 1 || lo > hi) {
    throw Error(ErrorCode::BadPositional,
                "positional window " + std::to_string(lo) + ":" + std::to_string(hi));
  }
  return Selector(Positional{lo, hi});
}

bool Selector::matches_key(const Key& k) const {
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, All>) {
          return true;
        } else if constexpr (std::is_same_v<S, List>) {
          return std::binary_search(s.keys.begin(), s.keys.end(), k);
        } else if constexpr (std::is_same_v<S, Prefix>) {
          return k.is_text() && k.text().starts_with(s.stem);
        } else if constexpr (std::is_same_v<S, Range>) {
          return !(k < s.lo) && !(s.hi < k);
        } else {
          throw Error(ErrorCode::InvalidArgument, "positional selector needs a key list");
        }
      },
      v_);
}

namespace {

bool is_positional_literal(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == s.size()) return false;
  auto digits = [](std::string_view part) {
    return std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  return digits(s.substr(0, colon)) && digits(s.substr(colon + 1));
}

std::size_t parse_index(std::string_view digits) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw Error(ErrorCode::BadPositional, "bad positional index '" + std::string(digits) + "'");
  }
  return out;
}

}  // namespace

Selector parse_positional(std::string_view literal) {
  if (!is_positional_literal(literal)) {
    throw Error(ErrorCode::BadPositional, "expected lo:hi, got '" + std::string(literal) + "'");
  }
  auto colon = literal.find(':');
  return Selector::positional(parse_index(literal.substr(0, colon)),
                              parse_index(literal.substr(colon + 1)));
}

Selector parse_selector(std::string_view source) {
  if (source == ":") return Selector::all();
  if (is_positional_literal(source)) return parse_positional(source);
  if (source.empty()) throw Error(ErrorCode::EmptySelector, "empty selector");

  const char delim = source.back();
  std::vector<std::string> tokens;
  std::string_view body = source.substr(0, source.size() - 1);
  std::size_t start = 0;
  while (start <= body.size()) {
    auto end = body.find(delim, start);
    if (end == std::string_view::npos) end = body.size();
    if (end > start) tokens.emplace_back(body.substr(start, end - start));
    start = end + 1;
  }
  if (tokens.empty()) throw Error(ErrorCode::EmptySelector, "selector has no tokens");

  auto colons = std::count(tokens.begin(), tokens.end(), ":");
  if (colons > 0) {
    if (tokens.size() != 3 || tokens[1] != ":") {
      throw Error(ErrorCode::MalformedRange, "range must be 'lo : hi' in '" + std::string(source) + "'");
    }
    return Selector::range(Key(tokens[0]), Key(tokens[2]));
  }
  if (tokens.size() == 1 && tokens[0].size() > 1 && tokens[0].back() == '*') {
    return Selector::prefix(tokens[0].substr(0, tokens[0].size() - 1));
  }
  std::vector<Key> keys(tokens.begin(), tokens.end());
  return Selector::list(std::move(keys));
}

std::vector<std::size_t> match_keys(const Selector& sel, std::span<const Key> keys) {
  std::vector<std::size_t> out;
  auto lower = [&](const Key& k) {
    return static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), k) - keys.begin());
  };
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Selector::All>) {
          out.resize(keys.size());
          for (std::size_t i = 0; i < keys.size(); ++i) out[i] = i;
        } else if constexpr (std::is_same_v<S, Selector::List>) {
          for (const Key& k : s.keys) {
            auto i = lower(k);
            if (i < keys.size() && keys[i] == k) out.push_back(i);
          }
        } else if constexpr (std::is_same_v<S, Selector::Prefix>) {
          for (auto i = lower(Key(s.stem)); i < keys.size(); ++i) {
            if (!keys[i].is_text() || !keys[i].text().starts_with(s.stem)) break;
            out.push_back(i);
          }
        } else if constexpr (std::is_same_v<S, Selector::Range>) {
          auto hi = static_cast<std::size_t>(
              std::upper_bound(keys.begin(), keys.end(), s.hi) - keys.begin());
          for (auto i = lower(s.lo); i < hi; ++i) out.push_back(i);
        } else {
          auto hi = std::min(s.hi, keys.size());
          for (auto i = s.lo - 1; i < hi; ++i) out.push_back(i);
        }
      },
      sel.variant());
  return out;
}

std::string to_string(const Selector& sel) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Selector::All>) {
          return "All";
        } else if constexpr (std::is_same_v<S, Selector::List>) {
          std::string out = "List[";
          for (std::size_t i = 0; i < s.keys.size(); ++i) out += (i ? "," : "") + s.keys[i].render();
          return out + "]";
        } else if constexpr (std::is_same_v<S, Selector::Prefix>) {
          return "Prefix(" + s.stem + ")";
        } else if constexpr (std::is_same_v<S, Selector::Range>) {
          return "Range(" + s.lo.render() + "," + s.hi.render() + ")";
        } else {
          return "Positional(" + std::to_string(s.lo) + "," + std::to_string(s.hi) + ")";
        }
      },
      sel.variant());
}

}  // namespace d4m
