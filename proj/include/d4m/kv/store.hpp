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
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "d4m/assoc.hpp"
#include "d4m/key.hpp"
#include "d4m/memory.hpp"
#include "d4m/selector.hpp"

namespace d4m::kv {

namespace detail {
struct StoreState;
struct BufferState;
class Source;
}  // namespace detail

/// How a table folds repeated writes to one cell. LastWriteWins is the
/// default; Sum and Concat exist for multiply sinks, where partial
/// products arrive as separate writes.
enum class Combiner { LastWriteWins, Sum, Concat };

std::string_view to_string(Combiner c) noexcept;

struct StoreOptions {
  bool sync = true;                            // fsync run files, manifest and directory
  std::size_t block_bytes = 4 * 1024;          // target run block payload
  std::size_t write_buffer_bytes = 8u << 20;   // per-handle buffer before an automatic flush
  std::size_t cursor_cache_bytes = 4u << 20;   // decoded blocks kept by a seeking cursor
  MemoryTracker* tracker = nullptr;            // charged for buffers, blocks and job state
};

struct IngestReport {
  std::size_t count = 0;
  double seconds = 0;
};

struct JobReport {
  std::size_t entries_read = 0;
  std::size_t partial_products = 0;
  std::size_t entries_written = 0;
  double seconds = 0;

  /// key=value lines.
  std::string to_text() const;
};

// Scan-time transforms, applied in stack order.
struct RangeFilter {
  Selector rows;
  Selector cols;
};
struct ValueFilter {
  Value value;
};
/// Keeps entries whose row has a degree in [min, max], read from column
/// `column` of table `degree_table`. Rows without a degree entry count as 0.
struct DegreeFilter {
  double min_degree = 0;
  double max_degree = std::numeric_limits<double>::infinity();
  std::string degree_table;
  Key column = Key("deg");
};
/// Row-wise multiply of the scanned rows against `other_table`, written to
/// `sink_table`. Only valid as the last stage of a job.
struct MultiplyJoin {
  std::string other_table;
  MultiplyMode mode = MultiplyMode::Arith;
  std::string sink_table;
  bool mask_by_source = false;  // keep only result cells present in the source row
  bool logical = false;         // treat operand values as 1
  bool upper_triangle_only = false;
};

using IteratorStage = std::variant<RangeFilter, ValueFilter, DegreeFilter, MultiplyJoin>;

struct IteratorSpec {
  std::vector<IteratorStage> stages;

  IteratorSpec& then(IteratorStage s) {
    stages.push_back(std::move(s));
    return *this;
  }
  bool has_multiply() const noexcept;
};

class Store;

/// Streaming reader over a snapshot of one table.
class Scanner {
 public:
  ~Scanner();
  Scanner(Scanner&&) noexcept;
  Scanner& operator=(Scanner&&) noexcept;

  /// Next triple in (row, col) order; false at the end.
  bool next(Triple& out);

 private:
  friend class TableHandle;
  explicit Scanner(std::unique_ptr<detail::Source> src);
  std::unique_ptr<detail::Source> src_;
};

/// Point lookups sharing one snapshot and cursor set.
class PointReader {
 public:
  ~PointReader();
  PointReader(PointReader&&) noexcept;
  PointReader& operator=(PointReader&&) noexcept;

  std::optional<Value> get(const Key& row, const Key& col);

 private:
  friend class TableHandle;
  explicit PointReader(std::unique_ptr<detail::Source> src);
  std::unique_ptr<detail::Source> src_;
};

/// Handle to one named table. Writes are buffered in the handle until
/// flush (or until the buffer limit triggers one). The first buffered
/// write takes the table's writer lock; flush releases it.
class TableHandle {
 public:
  ~TableHandle();
  TableHandle(TableHandle&&) noexcept;
  TableHandle& operator=(TableHandle&&) noexcept;

  const std::string& name() const noexcept { return name_; }
  Store store() const;

  IngestReport put(std::span<const Triple> triples);
  IngestReport put(std::initializer_list<Triple> triples) {
    return put(std::span<const Triple>(triples.begin(), triples.size()));
  }
  void put(const Triple& t);
  void erase(const Key& row, const Key& col);
  void flush();
  bool has_pending() const noexcept;

  Combiner combiner() const;
  std::optional<ValueKind> kind() const;

  std::vector<Triple> scan(const IteratorSpec& spec = {}) const;
  Scanner open_scanner(const IteratorSpec& spec = {}) const;
  PointReader point_reader() const;
  std::optional<Value> get(const Key& row, const Key& col) const;
  std::size_t count() const;

  /// Scan result as an associative array.
  Assoc to_assoc(const IteratorSpec& spec = {}) const;

 private:
  friend class Store;
  friend struct JobAccess;
  TableHandle(std::shared_ptr<detail::StoreState> st, std::string name);

  std::shared_ptr<detail::StoreState> st_;
  std::string name_;
  std::unique_ptr<detail::BufferState> buf_;
};

/// Embedded sorted table store rooted at one directory.
class Store {
 public:
  /// Opens or creates the store at `dir`.
  static Store open(const std::filesystem::path& dir, StoreOptions opts = {});

  const std::filesystem::path& directory() const;
  const StoreOptions& options() const;

  /// Binds (creating if absent) a table. A new table gets `combiner`; an
  /// existing table keeps its own.
  TableHandle bind(const std::string& name, Combiner combiner = Combiner::LastWriteWins);
  bool has_table(const std::string& name) const;
  std::vector<std::string> tables() const;
  void delete_table(const std::string& name);

  /// Job-unique table name that does not exist yet.
  std::string temp_name(const std::string& tag = "tmp");

  /// Runs a stack whose last stage is a MultiplyJoin.
  JobReport run_job(const TableHandle& source, const IteratorSpec& spec);

 private:
  friend class TableHandle;
  explicit Store(std::shared_ptr<detail::StoreState> st) : st_(std::move(st)) {}
  std::shared_ptr<detail::StoreState> st_;
};

struct TableMultOptions {
  IteratorSpec a_filter;  // applied to the scan of the stored transpose (rows are inner keys)
  IteratorSpec b_filter;  // applied to the scan of b; no positional selectors
  bool upper_triangle_only = false;
  bool logical = false;
  bool transpose_output = false;  // write C(j,i) instead of C(i,j)
};

/// sink = a * b, row-aligned outer products of the stored transpose `a_t`
/// against b. Partial products pre-combine in the sink's bounded buffer.
JobReport table_mult_transposed(const TableHandle& a_t, const TableHandle& b, TableHandle& sink,
                                MultiplyMode mode = MultiplyMode::Arith, const TableMultOptions& opts = {});

/// sink = a * b. Builds a temporary transpose of a, multiplies, and drops it.
JobReport table_mult(const TableHandle& a, const TableHandle& b, TableHandle& sink,
                     MultiplyMode mode = MultiplyMode::Arith, const TableMultOptions& opts = {});

/// Copies entries of `a` whose aligned cell in `weights` is >= min_weight
/// (absent cells count as 0) into sink. Returns the report; entries_read
/// counts a's entries and entries_written the kept ones.
JobReport threshold_join(const TableHandle& a, const TableHandle& weights, double min_weight, TableHandle& sink);

/// Writes every triple of `a` into `t`.
IngestReport put_assoc(TableHandle& t, const Assoc& a);

bool valid_table_name(std::string_view name) noexcept;

}  // namespace d4m::kv
