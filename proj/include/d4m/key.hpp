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

#include <compare>
#include <concepts>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>

namespace d4m {

enum class ValueKind { Number, Text };

/// Shortest decimal text that parses back to exactly `x`.
std::string format_number(double x);

/// Row or column key. Numbers sort before texts; numbers compare by value,
/// texts by unsigned byte order. NaN is rejected and -0.0 is stored as 0.0.
class Key {
 public:
  Key() : rep_(std::string{}) {}
  Key(std::string text) : rep_(std::move(text)) {}
  Key(std::string_view text) : rep_(std::string(text)) {}
  Key(const char* text) : rep_(std::string(text)) {}
  template <class T>
    requires std::is_arithmetic_v<T>
  Key(T number) : rep_(checked(static_cast<double>(number))) {}

  bool is_number() const noexcept { return rep_.index() == 0; }
  bool is_text() const noexcept { return rep_.index() == 1; }
  double number() const { return std::get<0>(rep_); }
  const std::string& text() const { return std::get<1>(rep_); }

  /// Text keys as-is, numbers in shortest round-trip form.
  std::string render() const;

  friend bool operator==(const Key&, const Key&) = default;
  friend std::strong_ordering operator<=>(const Key& a, const Key& b) noexcept;

 private:
  static double checked(double x);
  std::variant<double, std::string> rep_;
};

/// Stored value. A single Assoc holds values of one kind only.
class Value {
 public:
  Value() : rep_(0.0) {}
  Value(std::string text) : rep_(std::move(text)) {}
  Value(std::string_view text) : rep_(std::string(text)) {}
  Value(const char* text) : rep_(std::string(text)) {}
  template <class T>
    requires std::is_arithmetic_v<T>
  Value(T number) : rep_(static_cast<double>(number) == 0.0 ? 0.0 : static_cast<double>(number)) {}

  ValueKind kind() const noexcept { return rep_.index() == 0 ? ValueKind::Number : ValueKind::Text; }
  bool is_number() const noexcept { return rep_.index() == 0; }
  bool is_text() const noexcept { return rep_.index() == 1; }
  double number() const { return std::get<0>(rep_); }
  const std::string& text() const { return std::get<1>(rep_); }

  /// Zero numbers and empty texts are never stored in an Assoc.
  bool is_empty() const noexcept;
  std::string render() const;

  /// Exact comparison (bitwise for numbers up to the -0.0 normalization).
  friend bool operator==(const Value&, const Value&) = default;

 private:
  std::variant<double, std::string> rep_;
};

struct Triple {
  Key row;
  Key col;
  Value val;

  friend bool operator==(const Triple&, const Triple&) = default;
};

std::ostream& operator<<(std::ostream& os, const Key& k);
std::ostream& operator<<(std::ostream& os, const Value& v);
std::ostream& operator<<(std::ostream& os, const Triple& t);

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept;
};

}  // namespace d4m
