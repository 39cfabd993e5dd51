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

#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "d4m/memory.hpp"
#include "kv/io.hpp"

// Run file layout (integers little-endian):
//
//   "D4MRUN01"
//   block*        [u32 payload length][u32 crc32 of payload][payload]
//   index block   same framing; payload lists (first key, offset, length)
//   footer        [u64 index offset][u64 entry count][u32 crc32 of the
//                 preceding 16 bytes][u32 0]["D4MEND01"]
//
// A data payload is a varint entry count followed by entries of
// [varint key length][key][u8 flags][value], where the value is 8 raw
// bytes of a double or a varint length plus text bytes.

namespace d4m::kv::detail {

enum EntryFlags : std::uint8_t {
  kReset = 1,     // discard older history of the key before applying this entry
  kHasValue = 2,  // carries a value; reset without value is a tombstone
  kTextValue = 4,
};

/// Non-owning view of one stored entry.
struct EntryView {
  std::string_view key;  // encoded row || encoded col
  std::uint32_t row_len = 0;
  std::uint8_t flags = 0;
  double num = 0;
  std::string_view text;

  std::string_view row() const noexcept { return key.substr(0, row_len); }
  std::string_view col() const noexcept { return key.substr(row_len); }
  bool has_value() const noexcept { return flags & kHasValue; }
  bool is_text() const noexcept { return flags & kTextValue; }
};

class RunFile {
 public:
  /// Opens and validates header, footer and index.
  static std::shared_ptr<RunFile> open(const fs::path& path);

  std::size_t block_count() const noexcept { return first_keys_.size(); }
  std::uint64_t entry_count() const noexcept { return entries_; }
  const std::string& first_key(std::size_t block) const { return first_keys_[block]; }
  const fs::path& path() const noexcept { return path_; }

  /// Reads and checksums block `b` into `buf`; returns the payload view.
  std::string_view read_block(std::size_t b, std::string& buf) const;

 private:
  fs::path path_;
  Fd fd_;
  std::uint64_t entries_ = 0;
  std::vector<std::string> first_keys_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> lengths_;
};

/// Writes entries (strictly ascending keys) as a run file at `path`.
void write_run(const fs::path& path, const std::vector<EntryView>& entries, std::size_t block_bytes,
               bool sync);

/// Decodes a data payload into views over `payload`.
void decode_block(std::string_view payload, std::vector<EntryView>& out, const fs::path& p);

/// Cursor over one run with block-index seeks. A cursor that revisits a
/// block starts keeping decoded blocks in a small LRU cache of
/// `cache_bytes`; purely sequential use holds one block.
class RunCursor {
 public:
  RunCursor(std::shared_ptr<const RunFile> run, MemoryTracker* tracker, std::size_t cache_bytes);

  bool valid() const noexcept { return cur_ && pos_ < cur_->entries.size(); }
  const EntryView& entry() const noexcept { return cur_->entries[pos_]; }
  void next();
  /// Positions at the first entry with key >= target.
  void seek(std::string_view target);

 private:
  struct Block {
    std::string buf;
    std::vector<EntryView> entries;
    std::size_t bytes = 0;
  };

  void load(std::size_t block);

  std::shared_ptr<const RunFile> run_;
  std::size_t block_ = static_cast<std::size_t>(-1);
  std::shared_ptr<Block> cur_;
  std::size_t pos_ = 0;
  std::vector<bool> seen_;
  bool caching_ = false;
  std::size_t cache_cap_;
  std::size_t cached_bytes_ = 0;
  std::unordered_map<std::size_t, std::shared_ptr<Block>> cache_;
  std::list<std::size_t> lru_;  // most recent at the front
  TrackedBytes charge_;
};

}  // namespace d4m::kv::detail
