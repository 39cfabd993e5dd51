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
#include <string>
#include <string_view>

#include "d4m/key.hpp"

// Order-preserving byte encoding of keys: memcmp order of encodings equals
// Key order, and row||col encodings order entries by (row, col).
//
//   number: 0x01, then the IEEE-754 bits big-endian with the sign bit
//           flipped (all bits flipped for negatives)
//   text:   0x02, bytes with 0x00 escaped as 0x00 0xFF, then 0x00 0x00

namespace d4m::kv {

inline constexpr unsigned char kNumberTag = 0x01;
inline constexpr unsigned char kTextTag = 0x02;

void append_key(std::string& out, const Key& k);
std::string encode_key(const Key& k);
std::string encode_cell(const Key& row, const Key& col);

/// Length of the single encoded key at the front of `bytes`.
std::size_t encoded_key_length(std::string_view bytes);

/// Decodes the key at the front of `bytes`; returns bytes consumed.
std::size_t decode_key(std::string_view bytes, Key& out);
Key decode_key(std::string_view bytes);

}  // namespace d4m::kv
