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

#include "d4m/key.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "d4m/error.hpp"

namespace d4m {

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double Key::checked(double x) {
  if (std::isnan(x)) throw Error(ErrorCode::InvalidKey, "NaN is not a valid key");
  return x == 0.0 ? 0.0 : x;
}

std::string Key::render() const { return is_number() ? format_number(number()) : text(); }

std::strong_ordering operator<=>(const Key& a, const Key& b) noexcept {
  if (a.rep_.index() != b.rep_.index()) return a.rep_.index() <=> b.rep_.index();
  if (a.is_number()) {
    double x = a.number(), y = b.number();
    if (x < y) return std::strong_ordering::less;
    if (y < x) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  // std::string compares via char_traits<char>, which is unsigned-byte order.
  int c = a.text().compare(b.text());
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

bool Value::is_empty() const noexcept {
  return is_number() ? std::get<0>(rep_) == 0.0 : std::get<1>(rep_).empty();
}

std::string Value::render() const { return is_number() ? format_number(number()) : text(); }

std::ostream& operator<<(std::ostream& os, const Key& k) {
  return k.is_number() ? os << k.render() : os << '\'' << k.text() << '\'';
}

std::ostream& operator<<(std::ostream& os, const Value& v) {
  return v.is_number() ? os << v.render() : os << '\'' << v.text() << '\'';
}

std::ostream& operator<<(std::ostream& os, const Triple& t) {
  return os << '(' << t.row << ',' << t.col << ',' << t.val << ')';
}

std::size_t KeyHash::operator()(const Key& k) const noexcept {
  if (k.is_number()) return std::hash<double>{}(k.number()) * 31u + 1u;
  return std::hash<std::string>{}(k.text());
}

}  // namespace d4m
