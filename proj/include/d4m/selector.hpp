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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "d4m/key.hpp"

namespace d4m {

/// Key selector for one axis of an associative array.
///
/// Text form follows the trailing-delimiter convention: the last character
/// of the string is the delimiter, e.g. "alice bob " or "a,b,". Grammar:
///   ":"                 every key
///   "lo : hi "          closed key range [lo, hi]
///   "stem* "            keys starting with stem (single token only)
///   "k1 k2 ... "        exact keys, missing ones are skipped
///   "3:7"               1-based positional window (digits only, no delimiter)
class Selector {
 public:
  struct All {
    friend bool operator==(const All&, const All&) = default;
  };
  struct List {
    std::vector<Key> keys;  // sorted, unique
    friend bool operator==(const List&, const List&) = default;
  };
  struct Prefix {
    std::string stem;
    friend bool operator==(const Prefix&, const Prefix&) = default;
  };
  struct Range {
    Key lo, hi;
    friend bool operator==(const Range&, const Range&) = default;
  };
  struct Positional {
    std::size_t lo, hi;  // 1-based, inclusive
    friend bool operator==(const Positional&, const Positional&) = default;
  };
  using Variant = std::variant<All, List, Prefix, Range, Positional>;

  Selector() : v_(All{}) {}

  static Selector all() { return Selector(All{}); }
  static Selector list(std::vector<Key> keys);
  static Selector prefix(std::string stem);
  static Selector range(Key lo, Key hi);
  static Selector positional(std::size_t lo, std::size_t hi);

  const Variant& variant() const noexcept { return v_; }
  template <class T>
  bool is() const noexcept { return std::holds_alternative<T>(v_); }
  template <class T>
  const T& as() const { return std::get<T>(v_); }

  /// Whether a single key satisfies the selector. Positional selectors
  /// depend on the key list and are rejected here.
  bool matches_key(const Key& k) const;

  friend bool operator==(const Selector&, const Selector&) = default;

 private:
  explicit Selector(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Parses the text form documented on Selector.
Selector parse_selector(std::string_view source);

/// Parses a positional literal "lo:hi".
Selector parse_positional(std::string_view literal);

/// Ascending, duplicate-free 0-based indices of `keys` (strictly ascending)
/// matched by `sel`. Positional windows are clamped to the key count.
std::vector<std::size_t> match_keys(const Selector& sel, std::span<const Key> keys);

std::string to_string(const Selector& sel);

}  // namespace d4m
