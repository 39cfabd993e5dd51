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

#include <sys/stat.h>

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "d4m/kv/store.hpp"
#include "kv/io.hpp"
#include "kv/run.hpp"

namespace d4m::kv::detail {

struct TableMeta {
  std::optional<ValueKind> kind;
  Combiner combiner = Combiner::LastWriteWins;
  std::vector<std::string> runs;  // oldest first
};

struct Manifest {
  std::uint64_t generation = 0;
  std::map<std::string, TableMeta> tables;
};

std::string serialize_manifest(const Manifest& m);
Manifest parse_manifest(std::string_view text);

/// Runs of one table pinned at one instant.
struct TableSnapshot {
  TableMeta meta;
  std::vector<std::shared_ptr<const RunFile>> runs;
};

struct StoreState {
  fs::path dir;
  StoreOptions opts;
  Fd store_lock;

  mutable std::mutex mu;
  Manifest manifest;
  struct stat manifest_stat{};
  std::map<std::string, std::weak_ptr<RunFile>> run_cache;
  std::atomic<std::uint64_t> counter{0};
  std::uint64_t salt = 0;

  fs::path manifest_path() const { return dir / "MANIFEST"; }
  fs::path run_path(const std::string& id) const { return dir / (id + ".run"); }
  fs::path lock_path(const std::string& table) const { return dir / (table + ".lock"); }

  /// Re-reads the manifest if another handle or process replaced it.
  void refresh_locked();
  std::optional<TableMeta> table(const std::string& name);
  TableSnapshot snapshot(const std::string& name);
  std::shared_ptr<RunFile> run_locked(const std::string& id);

  /// Read-modify-write of the manifest under the cross-process manifest
  /// lock; `f` returns false to skip the write.
  void update(const std::function<bool(Manifest&)>& f);

  std::string new_run_id();
};

/// Folded state of one cell while merging writes.
struct Pending {
  std::uint8_t flags = 0;
  double num = 0;
  std::string text;
};

void fold_into(Pending& acc, std::uint8_t flags, double num, std::string_view text, Combiner c);

/// Whether a folded cell is visible to scans.
inline bool visible(const Pending& p) {
  if (!(p.flags & kHasValue)) return false;
  return (p.flags & kTextValue) ? !p.text.empty() : p.num != 0.0;
}

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

struct BufferState {
  std::unordered_map<std::string, Pending, StringHash, std::equal_to<>> cells;
  std::optional<ValueKind> kind;
  Combiner combiner = Combiner::LastWriteWins;
  std::size_t bytes = 0;
  TrackedBytes charge;
  Fd lock;

  explicit BufferState(MemoryTracker* t) : charge(t) {}
};

class Source {
 public:
  virtual ~Source() = default;
  virtual bool valid() const = 0;
  virtual const EntryView& entry() const = 0;
  virtual void next() = 0;
  /// Positions at the first visible entry with key >= target (never
  /// moves backwards past already consumed rows for filtered sources).
  virtual void seek(std::string_view target) = 0;
};

/// Merges the runs of a snapshot, folding each key oldest to newest.
std::unique_ptr<Source> merge_source(const TableSnapshot& snap, MemoryTracker* tracker, std::size_t cache_bytes);

/// Builds the scan pipeline for `stages` (no MultiplyJoin) over `table`.
std::unique_ptr<Source> build_chain(StoreState& st, const TableSnapshot& snap,
                                    std::span<const IteratorStage> stages);

/// Smallest key greater than every key of the encoded row `row`.
std::string past_row(std::string_view row);

Triple decode_triple(const EntryView& e);

}  // namespace d4m::kv::detail

namespace d4m::kv {

/// Internal access to handles for store jobs.
struct JobAccess {
  static detail::StoreState& state(const TableHandle& t) { return *t.st_; }
  /// Buffers one already-encoded write, flushing when the buffer is full.
  static void add(TableHandle& t, std::string_view key, std::uint8_t flags, double num, std::string_view text);
  /// Gives an empty sink the combiner a job needs; rejects a non-empty
  /// sink whose combiner differs.
  static void prepare_sink(TableHandle& sink, Combiner c, ValueKind kind);
};

}  // namespace d4m::kv
