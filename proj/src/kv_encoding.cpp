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

#include "d4m/kv/encoding.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "d4m/error.hpp"

namespace d4m::kv {

namespace {

[[noreturn]] void corrupt(const char* what) { throw Error(ErrorCode::CorruptRun, what); }

}  // namespace

void append_key(std::string& out, const Key& k) {
  if (k.is_number()) {
    auto bits = std::bit_cast<std::uint64_t>(k.number());
    bits = (bits >> 63) ? ~bits : bits ^ (std::uint64_t{1} << 63);
    out.push_back(static_cast<char>(kNumberTag));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((bits >> shift) & 0xFF));
    return;
  }
  out.push_back(static_cast<char>(kTextTag));
  for (char c : k.text()) {
    out.push_back(c);
    if (c == '\0') out.push_back(static_cast<char>(0xFF));
  }
  out.push_back('\0');
  out.push_back('\0');
}

std::string encode_key(const Key& k) {
  std::string out;
  append_key(out, k);
  return out;
}

std::string encode_cell(const Key& row, const Key& col) {
  std::string out;
  append_key(out, row);
  append_key(out, col);
  return out;
}

std::size_t encoded_key_length(std::string_view bytes) {
  if (bytes.empty()) corrupt("empty key encoding");
  auto tag = static_cast<unsigned char>(bytes[0]);
  if (tag == kNumberTag) {
    if (bytes.size() < 9) corrupt("truncated numeric key");
    return 9;
  }
  if (tag != kTextTag) corrupt("unknown key tag");
  for (std::size_t i = 1; i + 1 < bytes.size(); ++i) {
    if (bytes[i] != '\0') continue;
    if (bytes[i + 1] == '\0') return i + 2;
    if (static_cast<unsigned char>(bytes[i + 1]) != 0xFF) corrupt("bad text key escape");
    ++i;
  }
  corrupt("unterminated text key");
}

std::size_t decode_key(std::string_view bytes, Key& out) {
  auto len = encoded_key_length(bytes);
  if (static_cast<unsigned char>(bytes[0]) == kNumberTag) {
    std::uint64_t bits = 0;
    for (int i = 1; i <= 8; ++i) bits = (bits << 8) | static_cast<unsigned char>(bytes[i]);
    bits = (bits >> 63) ? bits ^ (std::uint64_t{1} << 63) : ~bits;
    out = Key(std::bit_cast<double>(bits));
    return len;
  }
  std::string text;
  text.reserve(len - 3);
  for (std::size_t i = 1; i < len - 2; ++i) {
    text.push_back(bytes[i]);
    if (bytes[i] == '\0') ++i;
  }
  out = Key(std::move(text));
  return len;
}

Key decode_key(std::string_view bytes) {
  Key k;
  decode_key(bytes, k);
  return k;
}

}  // namespace d4m::kv
