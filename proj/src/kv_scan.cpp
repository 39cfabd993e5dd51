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
#include <charconv>
#include <set>

#include "d4m/error.hpp"
#include "d4m/kv/encoding.hpp"
#include "kv/state.hpp"

namespace d4m::kv::detail {

std::string past_row(std::string_view row) {
  // Column encodings start with a tag below 0x03, so this sorts after every
  // cell of the row and before the next row.
  std::string out(row);
  out.push_back('\x03');
  return out;
}

Triple decode_triple(const EntryView& e) {
  Triple t;
  decode_key(e.row(), t.row);
  decode_key(e.col(), t.col);
  if (e.is_text()) {
    t.val = Value(std::string(e.text));
  } else {
    t.val = Value(e.num);
  }
  return t;
}

namespace {

bool visible_view(const EntryView& e) {
  if (!e.has_value()) return false;
  return e.is_text() ? !e.text.empty() : e.num != 0.0;
}

class MergeSource final : public Source {
 public:
  MergeSource(const TableSnapshot& snap, MemoryTracker* tracker, std::size_t cache_bytes)
      : combiner_(snap.meta.combiner), single_(snap.runs.size() == 1) {
    cursors_.reserve(snap.runs.size());
    for (const auto& r : snap.runs) cursors_.emplace_back(r, tracker, cache_bytes);
    rebuild();
  }

  bool valid() const override { return valid_; }
  const EntryView& entry() const override { return single_ ? cursors_[0].entry() : cur_; }
  void next() override {
    if (single_) {
      cursors_[0].next();
      settle_single();
    } else {
      advance();
    }
  }
  void seek(std::string_view target) override {
    if (valid_ && entry().key == target) return;
    for (auto& c : cursors_) c.seek(target);
    rebuild();
  }

 private:
  // One run needs no folding: entries are already unique per key.
  void settle_single() {
    auto& c = cursors_[0];
    while (c.valid() && !visible_view(c.entry())) c.next();
    valid_ = c.valid();
  }

  // Min-heap on (key, run position); older runs pop first on equal keys.
  bool after(std::size_t x, std::size_t y) const {
    auto kx = cursors_[x].entry().key, ky = cursors_[y].entry().key;
    if (kx != ky) return kx > ky;
    return x > y;
  }
  void push(std::size_t i) {
    heap_.push_back(i);
    std::push_heap(heap_.begin(), heap_.end(), [this](auto x, auto y) { return after(x, y); });
  }
  std::size_t pop() {
    std::pop_heap(heap_.begin(), heap_.end(), [this](auto x, auto y) { return after(x, y); });
    auto i = heap_.back();
    heap_.pop_back();
    return i;
  }
  void rebuild() {
    if (single_) {
      settle_single();
      return;
    }
    heap_.clear();
    for (std::size_t i = 0; i < cursors_.size(); ++i) {
      if (cursors_[i].valid()) push(i);
    }
    advance();
  }
  void advance() {
    while (!heap_.empty()) {
      key_.assign(cursors_[heap_.front()].entry().key);
      acc_ = Pending{};
      while (!heap_.empty() && cursors_[heap_.front()].entry().key == key_) {
        auto i = pop();
        const auto& e = cursors_[i].entry();
        fold_into(acc_, e.flags, e.num, e.text, combiner_);
        cursors_[i].next();
        if (cursors_[i].valid()) push(i);
      }
      if (!visible(acc_)) continue;
      cur_.key = key_;
      cur_.row_len = static_cast<std::uint32_t>(encoded_key_length(key_));
      cur_.flags = acc_.flags;
      cur_.num = acc_.num;
      cur_.text = acc_.text;
      valid_ = true;
      return;
    }
    valid_ = false;
  }

  Combiner combiner_;
  bool single_;
  std::vector<RunCursor> cursors_;
  std::vector<std::size_t> heap_;
  std::string key_;
  Pending acc_;
  EntryView cur_;
  bool valid_ = false;
};

/// Byte-level predicate over encoded keys for one selector.
struct KeyMatch {
  enum Mode { All, List, Prefix, Range } mode = All;
  std::vector<std::string> list;  // sorted encodings
  std::string lo, hi, prefix;

  static KeyMatch from(const Selector& s) {
    KeyMatch m;
    if (s.is<Selector::List>()) {
      m.mode = List;
      for (const auto& k : s.as<Selector::List>().keys) m.list.push_back(encode_key(k));
      std::sort(m.list.begin(), m.list.end());
    } else if (s.is<Selector::Prefix>()) {
      m.mode = Prefix;
      m.prefix = encode_key(Key(s.as<Selector::Prefix>().stem));
      m.prefix.resize(m.prefix.size() - 2);  // drop the terminator
    } else if (s.is<Selector::Range>()) {
      m.mode = Range;
      m.lo = encode_key(s.as<Selector::Range>().lo);
      m.hi = encode_key(s.as<Selector::Range>().hi);
    }
    return m;
  }

  bool operator()(std::string_view k) const {
    switch (mode) {
      case All:
        return true;
      case List:
        return std::binary_search(list.begin(), list.end(), k,
                                  [](std::string_view a, std::string_view b) { return a < b; });
      case Prefix:
        return k.starts_with(prefix);
      case Range:
        return k >= lo && k <= hi;
    }
    return false;
  }
};

using Factory = std::function<std::unique_ptr<Source>()>;

class RangeStage final : public Source {
 public:
  RangeStage(const RangeFilter& f, const Factory& upstream, MemoryTracker* tracker) : charge_(tracker) {
    if (f.rows.is<Selector::Positional>()) {
      positional_rows_ = true;
      pos_lo_ = f.rows.as<Selector::Positional>().lo;
      pos_hi_ = f.rows.as<Selector::Positional>().hi;
    } else {
      rows_ = KeyMatch::from(f.rows);
    }
    if (f.cols.is<Selector::Positional>()) {
      // Positions refer to the distinct columns of the whole upstream.
      std::set<std::string> distinct;
      std::size_t bytes = 0;
      for (auto pre = upstream(); pre->valid(); pre->next()) {
        auto [it, fresh] = distinct.emplace(pre->entry().col());
        if (fresh) charge_.set(bytes += it->size() + 48);
      }
      auto [lo, hi] = f.cols.as<Selector::Positional>();
      cols_.mode = KeyMatch::List;
      std::size_t pos = 1;
      for (const auto& c : distinct) {
        if (pos >= lo && pos <= hi) cols_.list.push_back(c);
        ++pos;
      }
    } else {
      cols_ = KeyMatch::from(f.cols);
    }
    up_ = upstream();
    settle();
  }

  bool valid() const override { return !done_ && up_->valid(); }
  const EntryView& entry() const override { return up_->entry(); }
  void next() override {
    up_->next();
    settle();
  }
  void seek(std::string_view target) override {
    if (positional_rows_) {
      while (valid() && entry().key < target) next();
      return;
    }
    if (valid() && entry().key < target) {
      up_->seek(target);
      settle();
    }
  }

 private:
  void settle() {
    while (!done_ && up_->valid()) {
      const auto& e = up_->entry();
      auto row = e.row();
      if (positional_rows_) {
        if (row != last_row_) {
          last_row_.assign(row);
          ++row_count_;
        }
        if (row_count_ > pos_hi_) {
          done_ = true;
          return;
        }
        if (row_count_ < pos_lo_) {
          up_->seek(past_row(last_row_));
          continue;
        }
      } else if (rows_.mode == KeyMatch::List) {
        while (li_ < rows_.list.size() && rows_.list[li_] < row) ++li_;
        if (li_ == rows_.list.size()) {
          done_ = true;
          return;
        }
        if (rows_.list[li_] != row) {
          up_->seek(rows_.list[li_]);
          continue;
        }
      } else if (rows_.mode == KeyMatch::Prefix) {
        if (row < rows_.prefix) {
          up_->seek(rows_.prefix);
          continue;
        }
        if (!row.starts_with(rows_.prefix)) {
          done_ = true;
          return;
        }
      } else if (rows_.mode == KeyMatch::Range) {
        if (row < rows_.lo) {
          up_->seek(rows_.lo);
          continue;
        }
        if (row > rows_.hi) {
          done_ = true;
          return;
        }
      }
      auto col = e.col();
      if (cols_.mode == KeyMatch::List) {
        auto it = std::lower_bound(cols_.list.begin(), cols_.list.end(), col,
                                   [](const std::string& a, std::string_view b) { return std::string_view(a) < b; });
        if (it == cols_.list.end()) {
          skip_row(row);
          continue;
        }
        if (*it != col) {
          std::string target(row);
          target += *it;
          up_->seek(target);
          continue;
        }
        return;
      }
      if (cols_(col)) return;
      up_->next();
    }
  }
  void skip_row(std::string_view row) {
    if (positional_rows_) {
      up_->seek(past_row(last_row_));
    } else {
      up_->seek(past_row(std::string(row)));
    }
  }

  std::unique_ptr<Source> up_;
  KeyMatch rows_, cols_;
  bool positional_rows_ = false;
  std::size_t pos_lo_ = 0, pos_hi_ = 0, row_count_ = 0;
  std::string last_row_;
  std::size_t li_ = 0;
  bool done_ = false;
  TrackedBytes charge_;
};

class ValueStage final : public Source {
 public:
  ValueStage(std::unique_ptr<Source> up, Value v) : up_(std::move(up)), v_(std::move(v)) { settle(); }

  bool valid() const override { return up_->valid(); }
  const EntryView& entry() const override { return up_->entry(); }
  void next() override {
    up_->next();
    settle();
  }
  void seek(std::string_view target) override {
    if (valid() && entry().key < target) {
      up_->seek(target);
      settle();
    }
  }

 private:
  bool match(const EntryView& e) const {
    if (v_.is_text()) return e.is_text() && e.text == v_.text();
    return !e.is_text() && e.num == v_.number();
  }
  void settle() {
    while (up_->valid() && !match(up_->entry())) up_->next();
  }

  std::unique_ptr<Source> up_;
  Value v_;
};

double degree_value(const EntryView& e) {
  if (!e.is_text()) return e.num;
  double d = 0;
  std::from_chars(e.text.data(), e.text.data() + e.text.size(), d);
  return d;
}

class DegreeStage final : public Source {
 public:
  DegreeStage(std::unique_ptr<Source> up, std::unique_ptr<Source> degrees, const DegreeFilter& f)
      : up_(std::move(up)), deg_(std::move(degrees)), col_(encode_key(f.column)), min_(f.min_degree),
        max_(f.max_degree) {
    settle();
  }

  bool valid() const override { return up_->valid(); }
  const EntryView& entry() const override { return up_->entry(); }
  void next() override {
    up_->next();
    settle();
  }
  void seek(std::string_view target) override {
    if (valid() && entry().key < target) {
      up_->seek(target);
      settle();
    }
  }

 private:
  void settle() {
    while (up_->valid()) {
      auto row = up_->entry().row();
      if (row != row_) {
        row_.assign(row);
        auto key = row_ + col_;
        deg_->seek(key);
        double d = deg_->valid() && deg_->entry().key == key ? degree_value(deg_->entry()) : 0.0;
        ok_ = d >= min_ && d <= max_;
      }
      if (ok_) return;
      up_->seek(past_row(row_));
    }
  }

  std::unique_ptr<Source> up_, deg_;
  std::string col_;
  double min_, max_;
  std::string row_;
  bool ok_ = false;
};

}  // namespace

std::unique_ptr<Source> merge_source(const TableSnapshot& snap, MemoryTracker* tracker, std::size_t cache_bytes) {
  return std::make_unique<MergeSource>(snap, tracker, cache_bytes);
}

std::unique_ptr<Source> build_chain(StoreState& st, const TableSnapshot& snap,
                                    std::span<const IteratorStage> stages) {
  if (stages.empty()) return merge_source(snap, st.opts.tracker, st.opts.cursor_cache_bytes);
  auto below = stages.first(stages.size() - 1);
  Factory upstream = [&st, &snap, below] { return build_chain(st, snap, below); };
  const auto& top = stages.back();
  if (const auto* r = std::get_if<RangeFilter>(&top)) {
    return std::make_unique<RangeStage>(*r, upstream, st.opts.tracker);
  }
  if (const auto* v = std::get_if<ValueFilter>(&top)) {
    return std::make_unique<ValueStage>(upstream(), v->value);
  }
  if (const auto* d = std::get_if<DegreeFilter>(&top)) {
    if (d->min_degree > d->max_degree) {
      throw Error(ErrorCode::InvalidIteratorSpec, "degree filter needs min <= max");
    }
    std::unique_ptr<Source> degrees;
    if (d->degree_table.empty()) {
      degrees = merge_source(snap, st.opts.tracker, st.opts.cursor_cache_bytes);
    } else {
      if (!st.table(d->degree_table)) {
        throw Error(ErrorCode::MissingTable, "degree table " + d->degree_table + " does not exist");
      }
      degrees = merge_source(st.snapshot(d->degree_table), st.opts.tracker, st.opts.cursor_cache_bytes);
    }
    return std::make_unique<DegreeStage>(upstream(), std::move(degrees), *d);
  }
  throw Error(ErrorCode::InvalidIteratorSpec, "MultiplyJoin must be the last stage of a job");
}

}  // namespace d4m::kv::detail
