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

#include <algorithm>
#include <chrono>
#include <unordered_map>

#include "d4m/error.hpp"
#include "d4m/kv/encoding.hpp"
#include "kv/state.hpp"

namespace d4m::kv {

using namespace detail;

namespace {

struct Cell {
  std::string key;  // column encoding (or full cell key)
  double num = 0;
  std::string text;
  bool is_text = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string render_value(const Cell& c) { return c.is_text ? c.text : format_number(c.num); }

std::string render_stored(const EntryView& e) { return e.is_text() ? std::string(e.text) : format_number(e.num); }

/// Reads the row at the source position into `out`, leaving the source at
/// the next row. Returns the approximate bytes held.
std::size_t read_row(Source& src, std::string& row, std::vector<Cell>& out) {
  out.clear();
  row.assign(src.entry().row());
  std::size_t bytes = row.size();
  while (src.valid() && src.entry().row() == row) {
    const auto& e = src.entry();
    Cell c;
    c.key.assign(e.col());
    c.is_text = e.is_text();
    c.num = e.num;
    c.text.assign(e.text);
    bytes += c.key.size() + c.text.size() + sizeof(Cell);
    out.push_back(std::move(c));
    src.next();
  }
  return bytes;
}

Combiner sink_combiner(MultiplyMode mode) { return mode == MultiplyMode::Arith ? Combiner::Sum : Combiner::Concat; }
ValueKind sink_kind(MultiplyMode mode) { return mode == MultiplyMode::Arith ? ValueKind::Number : ValueKind::Text; }

void check_catval(MultiplyMode mode, const TableSnapshot& a, const TableSnapshot& b) {
  if (mode == MultiplyMode::CatVal && a.meta.kind && b.meta.kind && *a.meta.kind != *b.meta.kind) {
    throw Error(ErrorCode::MixedValueVariant, "CatVal multiply needs operands of one value kind");
  }
}

void reject_positional(const IteratorSpec& spec, const char* what) {
  for (const auto& s : spec.stages) {
    if (std::holds_alternative<MultiplyJoin>(s)) {
      throw Error(ErrorCode::InvalidIteratorSpec, std::string(what) + " cannot contain a MultiplyJoin");
    }
    if (const auto* r = std::get_if<RangeFilter>(&s); r && r->rows.is<Selector::Positional>()) {
      throw Error(ErrorCode::InvalidIteratorSpec, std::string(what) + " cannot use positional row selectors");
    }
  }
}

void require_table(StoreState& st, const std::string& name) {
  if (!st.table(name)) throw Error(ErrorCode::MissingTable, "table " + name + " does not exist");
}

/// Accumulator for one output cell of a row-wise multiply.
struct Acc {
  double num = 0;
  std::string text;
  bool set = false;
};

void accumulate(Acc& acc, MultiplyMode mode, double product, std::string_view inner, const Cell& a,
                const EntryView& b) {
  if (mode == MultiplyMode::Arith) {
    acc.num += product;
  } else {
    if (acc.set) acc.text += kConcatDelimiter;
    if (mode == MultiplyMode::CatKey) {
      acc.text += inner;
    } else {
      acc.text += render_value(a);
      acc.text += '*';
      acc.text += render_stored(b);
    }
  }
  acc.set = true;
}

void emit(TableHandle& sink, MultiplyMode mode, std::string_view key, const Acc& acc, JobReport& rep) {
  if (!acc.set) return;
  if (mode == MultiplyMode::Arith) {
    if (acc.num == 0.0) return;
    JobAccess::add(sink, key, kHasValue, acc.num, {});
  } else {
    JobAccess::add(sink, key, kHasValue | kTextValue, 0, acc.text);
  }
  ++rep.entries_written;
}

}  // namespace

JobReport Store::run_job(const TableHandle& source, const IteratorSpec& spec) {
  auto t0 = std::chrono::steady_clock::now();
  if (spec.stages.empty() || !std::holds_alternative<MultiplyJoin>(spec.stages.back())) {
    throw Error(ErrorCode::InvalidIteratorSpec, "a job must end with a MultiplyJoin");
  }
  auto stages = std::span<const IteratorStage>(spec.stages).first(spec.stages.size() - 1);
  for (const auto& s : stages) {
    if (std::holds_alternative<MultiplyJoin>(s)) {
      throw Error(ErrorCode::InvalidIteratorSpec, "at most one MultiplyJoin per stack");
    }
  }
  const auto& mj = std::get<MultiplyJoin>(spec.stages.back());
  require_table(*st_, source.name());
  require_table(*st_, mj.other_table);
  if (mj.sink_table == source.name() || mj.sink_table == mj.other_table) {
    throw Error(ErrorCode::SinkCollision, "sink " + mj.sink_table + " is also an operand");
  }

  auto src_snap = st_->snapshot(source.name());
  auto other_snap = st_->snapshot(mj.other_table);
  check_catval(mj.mode, src_snap, other_snap);
  auto chain = build_chain(*st_, src_snap, stages);
  auto other = merge_source(other_snap, st_->opts.tracker, st_->opts.cursor_cache_bytes);
  auto sink = bind(mj.sink_table);
  JobAccess::prepare_sink(sink, sink_combiner(mj.mode), sink_kind(mj.mode));

  JobReport rep;
  TrackedBytes charge(st_->opts.tracker);
  std::string row;
  std::vector<Cell> cells;
  std::vector<Acc> masked;
  std::unordered_map<std::string, Acc> open;
  std::vector<const std::pair<const std::string, Acc>*> order;
  std::string key, inner;
  while (chain->valid()) {
    auto bytes = read_row(*chain, row, cells);
    rep.entries_read += cells.size();
    if (mj.mask_by_source) masked.assign(cells.size(), Acc{});
    open.clear();
    for (const auto& a : cells) {
      other->seek(a.key);
      double av = (mj.logical || a.is_text) ? 1.0 : a.num;
      if (mj.mode == MultiplyMode::CatKey) inner = decode_key(a.key).render();
      for (; other->valid() && other->entry().row() == a.key; other->next()) {
        const auto& b = other->entry();
        ++rep.entries_read;
        auto j = b.col();
        if (mj.upper_triangle_only && !(std::string_view(row) < j)) continue;
        double bv = (mj.logical || b.is_text()) ? 1.0 : b.num;
        if (mj.mask_by_source) {
          auto it = std::lower_bound(cells.begin(), cells.end(), j,
                                     [](const Cell& c, std::string_view k) { return std::string_view(c.key) < k; });
          if (it == cells.end() || it->key != j) continue;
          accumulate(masked[static_cast<std::size_t>(it - cells.begin())], mj.mode, av * bv, inner, a, b);
        } else {
          auto [it, fresh] = open.try_emplace(std::string(j));
          if (fresh) bytes += j.size() + sizeof(Acc) + 48;
          accumulate(it->second, mj.mode, av * bv, inner, a, b);
        }
        ++rep.partial_products;
      }
    }
    charge.set(bytes + masked.size() * sizeof(Acc));
    if (mj.mask_by_source) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        key = row + cells[i].key;
        emit(sink, mj.mode, key, masked[i], rep);
      }
    } else {
      order.clear();
      for (const auto& kv : open) order.push_back(&kv);
      std::sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->first < y->first; });
      for (const auto* kv : order) {
        key = row + kv->first;
        emit(sink, mj.mode, key, kv->second, rep);
      }
    }
  }
  sink.flush();
  rep.seconds = seconds_since(t0);
  return rep;
}

JobReport table_mult_transposed(const TableHandle& a_t, const TableHandle& b, TableHandle& sink, MultiplyMode mode,
                                const TableMultOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  auto& st = JobAccess::state(a_t);
  if (sink.name() == a_t.name() || sink.name() == b.name()) {
    throw Error(ErrorCode::SinkCollision, "sink " + sink.name() + " is also an operand");
  }
  reject_positional(opts.a_filter, "transpose filter");
  reject_positional(opts.b_filter, "operand filter");
  require_table(st, a_t.name());
  require_table(st, b.name());
  auto a_snap = st.snapshot(a_t.name());
  auto b_snap = st.snapshot(b.name());
  check_catval(mode, a_snap, b_snap);
  auto left = build_chain(st, a_snap, opts.a_filter.stages);
  auto right = build_chain(st, b_snap, opts.b_filter.stages);
  JobAccess::prepare_sink(sink, sink_combiner(mode), sink_kind(mode));

  JobReport rep;
  TrackedBytes charge(st.opts.tracker);
  std::string k, kb, key, inner;
  std::vector<Cell> arow, brow;
  while (left->valid() && right->valid()) {
    auto bytes = read_row(*left, k, arow);
    rep.entries_read += arow.size();
    if (right->entry().row() < std::string_view(k)) right->seek(k);
    if (!right->valid()) break;
    if (right->entry().row() != std::string_view(k)) continue;
    bytes += read_row(*right, kb, brow);
    rep.entries_read += brow.size();
    charge.set(bytes);
    if (mode == MultiplyMode::CatKey) inner = decode_key(k).render();
    for (const auto& a : arow) {
      double av = (opts.logical || a.is_text) ? 1.0 : a.num;
      for (const auto& bc : brow) {
        if (opts.upper_triangle_only && !(a.key < bc.key)) continue;
        key = opts.transpose_output ? bc.key + a.key : a.key + bc.key;
        ++rep.partial_products;
        if (mode == MultiplyMode::Arith) {
          double bv = (opts.logical || bc.is_text) ? 1.0 : bc.num;
          JobAccess::add(sink, key, kHasValue, av * bv, {});
        } else if (mode == MultiplyMode::CatKey) {
          JobAccess::add(sink, key, kHasValue | kTextValue, 0, inner);
        } else {
          auto piece = render_value(a) + '*' + render_value(bc);
          JobAccess::add(sink, key, kHasValue | kTextValue, 0, piece);
        }
        ++rep.entries_written;
      }
    }
  }
  sink.flush();
  rep.seconds = seconds_since(t0);
  return rep;
}

JobReport table_mult(const TableHandle& a, const TableHandle& b, TableHandle& sink, MultiplyMode mode,
                     const TableMultOptions& opts) {
  if (sink.name() == a.name() || sink.name() == b.name()) {
    throw Error(ErrorCode::SinkCollision, "sink " + sink.name() + " is also an operand");
  }
  auto store = a.store();
  auto& st = JobAccess::state(a);
  require_table(st, a.name());
  auto tname = store.temp_name("T");
  JobReport rep;
  try {
    auto t = store.bind(tname);
    auto snap = st.snapshot(a.name());
    if (snap.meta.kind) JobAccess::prepare_sink(t, Combiner::LastWriteWins, *snap.meta.kind);
    std::string key;
    for (auto src = merge_source(snap, st.opts.tracker, st.opts.cursor_cache_bytes); src->valid(); src->next()) {
      const auto& e = src->entry();
      key.assign(e.col());
      key += e.row();
      JobAccess::add(t, key, e.flags | kReset, e.num, e.text);
    }
    t.flush();
    rep = table_mult_transposed(t, b, sink, mode, opts);
  } catch (...) {
    store.delete_table(tname);
    throw;
  }
  store.delete_table(tname);
  return rep;
}

JobReport threshold_join(const TableHandle& a, const TableHandle& weights, double min_weight, TableHandle& sink) {
  auto t0 = std::chrono::steady_clock::now();
  if (sink.name() == a.name() || sink.name() == weights.name()) {
    throw Error(ErrorCode::SinkCollision, "sink " + sink.name() + " is also an operand");
  }
  auto& st = JobAccess::state(a);
  auto a_snap = st.snapshot(a.name());
  auto w_snap = st.snapshot(weights.name());
  auto src = merge_source(a_snap, st.opts.tracker, st.opts.cursor_cache_bytes);
  auto w = merge_source(w_snap, st.opts.tracker, st.opts.cursor_cache_bytes);
  if (a_snap.meta.kind) JobAccess::prepare_sink(sink, Combiner::LastWriteWins, *a_snap.meta.kind);
  JobReport rep;
  for (; src->valid(); src->next()) {
    const auto& e = src->entry();
    ++rep.entries_read;
    if (w->valid() && w->entry().key < e.key) w->seek(e.key);
    double weight = w->valid() && w->entry().key == e.key && !w->entry().is_text() ? w->entry().num : 0.0;
    if (weight < min_weight) continue;
    JobAccess::add(sink, e.key, e.flags | kReset, e.num, e.text);
    ++rep.entries_written;
  }
  sink.flush();
  rep.seconds = seconds_since(t0);
  return rep;
}

}  // namespace d4m::kv
