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

#include "d4m/assoc.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "d4m/error.hpp"

namespace d4m {

using kernels::Csr;
using kernels::Index;

class AssocBuilder {
 public:
  static Assoc make(std::vector<Key> rows, std::vector<Key> cols, std::vector<std::size_t> row_ptr,
                    std::vector<Index> col, std::vector<double> num, std::vector<std::string> text,
                    ValueKind kind) {
    Assoc a;
    a.rows_ = std::move(rows);
    a.cols_ = std::move(cols);
    a.row_ptr_ = std::move(row_ptr);
    a.col_ = std::move(col);
    a.num_ = std::move(num);
    a.text_ = std::move(text);
    a.kind_ = kind;
    a.condense();
    return a;
  }
};

namespace {

std::string_view kind_name(ValueKind k) { return k == ValueKind::Number ? "number" : "text"; }

void check_rule(CollisionRule rule, ValueKind kind) {
  if (rule == CollisionRule::SumNumeric && kind != ValueKind::Number) {
    throw Error(ErrorCode::IncompatibleCollisionRule, "SumNumeric requires numeric values");
  }
  if (rule == CollisionRule::ConcatText && kind != ValueKind::Text) {
    throw Error(ErrorCode::IncompatibleCollisionRule, "ConcatText requires text values");
  }
}

std::vector<Key> sorted_unique(std::vector<Key> keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

Index index_of(const std::vector<Key>& keys, const Key& k) {
  return static_cast<Index>(std::lower_bound(keys.begin(), keys.end(), k) - keys.begin());
}

// Maps every key of `from` to its position in the sorted superset `to`.
std::vector<Index> remap_into(const std::vector<Key>& from, const std::vector<Key>& to) {
  std::vector<Index> m(from.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    while (to[j] < from[i]) ++j;
    m[i] = static_cast<Index>(j);
  }
  return m;
}

std::vector<Key> key_union(const std::vector<Key>& a, const std::vector<Key>& b) {
  std::vector<Key> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Re-expresses a numeric array over larger row/column key spaces.
Csr widen(const Assoc& a, const std::vector<Key>& rows, const std::vector<Key>& cols) {
  auto rmap = remap_into(a.row_keys(), rows);
  auto cmap = remap_into(a.col_keys(), cols);
  Csr out;
  out.ncols = cols.size();
  out.row_ptr.assign(rows.size() + 1, 0);
  auto rp = a.row_ptr();
  for (std::size_t i = 0; i < a.row_keys().size(); ++i) out.row_ptr[rmap[i] + 1] = rp[i + 1] - rp[i];
  std::partial_sum(out.row_ptr.begin(), out.row_ptr.end(), out.row_ptr.begin());
  out.col.reserve(a.nnz());
  for (auto c : a.col_index()) out.col.push_back(cmap[c]);
  out.val.assign(a.numbers().begin(), a.numbers().end());
  return out;
}

Assoc numeric_view(const Assoc& a) { return a.is_numeric() ? a : logical(a); }

}  // namespace

void Assoc::condense() {
  const bool text = kind_ == ValueKind::Text;
  std::vector<char> col_used(cols_.size(), 0);
  std::vector<Key> rows;
  std::vector<std::size_t> row_ptr{0};
  std::size_t w = 0;
  for (std::size_t i = 0; i + 1 < row_ptr_.size(); ++i) {
    for (auto p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      bool keep = text ? !text_[p].empty() : num_[p] != 0.0;
      if (!keep) continue;
      col_[w] = col_[p];
      if (text) {
        if (w != p) text_[w] = std::move(text_[p]);
      } else {
        num_[w] = num_[p];
      }
      col_used[col_[w]] = 1;
      ++w;
    }
    if (w > row_ptr.back()) {
      rows.push_back(std::move(rows_[i]));
      row_ptr.push_back(w);
    }
  }
  col_.resize(w);
  if (text) {
    text_.resize(w);
    num_.clear();
  } else {
    num_.resize(w);
    text_.clear();
  }
  std::vector<Index> cmap(cols_.size(), 0);
  std::vector<Key> cols;
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    if (!col_used[c]) continue;
    cmap[c] = static_cast<Index>(cols.size());
    cols.push_back(std::move(cols_[c]));
  }
  for (auto& c : col_) c = cmap[c];
  rows_ = std::move(rows);
  cols_ = std::move(cols);
  row_ptr_ = std::move(row_ptr);
  if (col_.empty()) kind_ = ValueKind::Number;
}

Assoc Assoc::from_triples(std::span<const Triple> triples, std::optional<CollisionRule> rule) {
  if (triples.empty()) return Assoc();
  const ValueKind kind = triples.front().val.kind();
  for (const auto& t : triples) {
    if (t.val.kind() != kind) {
      throw Error(ErrorCode::MixedValueVariant, "triples mix number and text values");
    }
  }
  const CollisionRule r =
      rule.value_or(kind == ValueKind::Number ? CollisionRule::SumNumeric : CollisionRule::Last);
  check_rule(r, kind);

  std::vector<Key> rows, cols;
  rows.reserve(triples.size());
  cols.reserve(triples.size());
  for (const auto& t : triples) {
    rows.push_back(t.row);
    cols.push_back(t.col);
  }
  rows = sorted_unique(std::move(rows));
  cols = sorted_unique(std::move(cols));

  struct Coord {
    Index r, c;
    std::size_t seq;
  };
  std::vector<Coord> coords(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    coords[i] = {index_of(rows, triples[i].row), index_of(cols, triples[i].col), i};
  }
  std::sort(coords.begin(), coords.end(), [](const Coord& x, const Coord& y) {
    return std::tie(x.r, x.c, x.seq) < std::tie(y.r, y.c, y.seq);
  });

  std::vector<std::size_t> row_ptr(rows.size() + 1, 0);
  std::vector<Index> col;
  std::vector<double> num;
  std::vector<std::string> text;
  for (std::size_t g = 0; g < coords.size();) {
    auto e = g;
    while (e < coords.size() && coords[e].r == coords[g].r && coords[e].c == coords[g].c) ++e;
    const Value& first = triples[coords[g].seq].val;
    const Value& last = triples[coords[e - 1].seq].val;
    col.push_back(coords[g].c);
    ++row_ptr[coords[g].r + 1];
    if (kind == ValueKind::Number) {
      double v = 0.0;
      switch (r) {
        case CollisionRule::SumNumeric:
          for (auto i = g; i < e; ++i) v += triples[coords[i].seq].val.number();
          break;
        case CollisionRule::First: v = first.number(); break;
        default: v = last.number(); break;
      }
      num.push_back(v);
    } else {
      std::string v;
      switch (r) {
        case CollisionRule::ConcatText:
          for (auto i = g; i < e; ++i) {
            if (i > g) v += kConcatDelimiter;
            v += triples[coords[i].seq].val.text();
          }
          break;
        case CollisionRule::First: v = first.text(); break;
        default: v = last.text(); break;
      }
      text.push_back(std::move(v));
    }
    g = e;
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return AssocBuilder::make(std::move(rows), std::move(cols), std::move(row_ptr), std::move(col),
                            std::move(num), std::move(text), kind);
}

Assoc Assoc::from_csr(std::vector<Key> rows, std::vector<Key> cols, Csr m) {
  return AssocBuilder::make(std::move(rows), std::move(cols), std::move(m.row_ptr), std::move(m.col),
                            std::move(m.val), {}, ValueKind::Number);
}

std::vector<Triple> Assoc::to_triples() const {
  std::vector<Triple> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (auto p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      out.push_back({rows_[i], cols_[col_[p]], value(p)});
    }
  }
  return out;
}

Value Assoc::value(std::size_t entry) const {
  return kind_ == ValueKind::Number ? Value(num_[entry]) : Value(text_[entry]);
}

std::optional<Value> Assoc::at(const Key& row, const Key& col) const {
  auto r = std::lower_bound(rows_.begin(), rows_.end(), row);
  if (r == rows_.end() || *r != row) return std::nullopt;
  auto c = std::lower_bound(cols_.begin(), cols_.end(), col);
  if (c == cols_.end() || *c != col) return std::nullopt;
  auto i = static_cast<std::size_t>(r - rows_.begin());
  auto ci = static_cast<Index>(c - cols_.begin());
  auto b = col_.begin() + row_ptr_[i], e = col_.begin() + row_ptr_[i + 1];
  auto p = std::lower_bound(b, e, ci);
  if (p == e || *p != ci) return std::nullopt;
  return value(static_cast<std::size_t>(p - col_.begin()));
}

kernels::CsrView Assoc::csr() const {
  if (!is_numeric()) throw Error(ErrorCode::MixedValueVariant, "CSR view requires numeric values");
  return kernels::CsrView(cols_.size(), row_ptr_, col_, num_);
}

std::size_t Assoc::byte_size() const noexcept {
  std::size_t n = sizeof(Assoc);
  for (const auto* keys : {&rows_, &cols_}) {
    n += keys->capacity() * sizeof(Key);
    for (const auto& k : *keys)
      if (k.is_text() && k.text().size() >= sizeof(std::string)) n += k.text().capacity();
  }
  n += row_ptr_.capacity() * sizeof(std::size_t) + col_.capacity() * sizeof(Index);
  n += num_.capacity() * sizeof(double) + text_.capacity() * sizeof(std::string);
  for (const auto& t : text_)
    if (t.size() >= sizeof(std::string)) n += t.capacity();
  return n;
}

Assoc select(const Assoc& a, const Selector& rows, const Selector& cols) {
  auto ri = match_keys(rows, a.row_keys());
  auto ci = match_keys(cols, a.col_keys());
  std::vector<char> col_on(a.col_keys().size(), 0);
  for (auto c : ci) col_on[c] = 1;

  std::vector<Key> out_rows;
  std::vector<std::size_t> row_ptr{0};
  std::vector<Index> col;
  std::vector<double> num;
  std::vector<std::string> text;
  auto rp = a.row_ptr();
  auto cx = a.col_index();
  for (auto i : ri) {
    for (auto p = rp[i]; p < rp[i + 1]; ++p) {
      if (!col_on[cx[p]]) continue;
      col.push_back(cx[p]);
      if (a.is_numeric()) {
        num.push_back(a.numbers()[p]);
      } else {
        text.push_back(a.texts()[p]);
      }
    }
    out_rows.push_back(a.row_keys()[i]);
    row_ptr.push_back(col.size());
  }
  return AssocBuilder::make(std::move(out_rows), a.col_keys(), std::move(row_ptr), std::move(col),
                            std::move(num), std::move(text), a.kind());
}

Assoc equals_value(const Assoc& a, const Value& v) {
  if (a.empty()) return Assoc();
  if (a.kind() != v.kind()) {
    throw Error(ErrorCode::MixedValueVariant, "comparing a " + std::string(kind_name(a.kind())) +
                                                  " array with a " + std::string(kind_name(v.kind())) +
                                                  " value");
  }
  std::vector<std::size_t> row_ptr{0};
  std::vector<Index> col;
  std::vector<double> num;
  std::vector<std::string> text;
  auto rp = a.row_ptr();
  for (std::size_t i = 0; i < a.row_keys().size(); ++i) {
    for (auto p = rp[i]; p < rp[i + 1]; ++p) {
      if (a.is_numeric() ? a.numbers()[p] != v.number() : a.texts()[p] != v.text()) continue;
      col.push_back(a.col_index()[p]);
      if (a.is_numeric()) {
        num.push_back(a.numbers()[p]);
      } else {
        text.push_back(a.texts()[p]);
      }
    }
    row_ptr.push_back(col.size());
  }
  return AssocBuilder::make(a.row_keys(), a.col_keys(), std::move(row_ptr), std::move(col),
                            std::move(num), std::move(text), a.kind());
}

Assoc elementwise(const Assoc& a0, const Assoc& b0, EwiseOp op) {
  Assoc a = numeric_view(a0), b = numeric_view(b0);
  auto rows = key_union(a.row_keys(), b.row_keys());
  auto cols = key_union(a.col_keys(), b.col_keys());
  Csr wa = widen(a, rows, cols);
  Csr wb = widen(b, rows, cols);
  return Assoc::from_csr(std::move(rows), std::move(cols), kernels::parallel::ewise(wa, wb, op));
}

namespace {

std::vector<std::int64_t> inner_join(const std::vector<Key>& a_cols, const std::vector<Key>& b_rows) {
  std::vector<std::int64_t> join(a_cols.size(), kernels::kNoJoin);
  std::size_t j = 0;
  for (std::size_t k = 0; k < a_cols.size(); ++k) {
    while (j < b_rows.size() && b_rows[j] < a_cols[k]) ++j;
    if (j < b_rows.size() && b_rows[j] == a_cols[k]) join[k] = static_cast<std::int64_t>(j);
  }
  return join;
}

Assoc concat_multiply(const Assoc& a, const Assoc& b, MultiplyMode mode) {
  auto join = inner_join(a.col_keys(), b.row_keys());
  const auto n = static_cast<std::int64_t>(a.row_keys().size());
  std::vector<std::vector<std::pair<Index, std::string>>> out_rows(a.row_keys().size());
  auto arp = a.row_ptr();
  auto brp = b.row_ptr();
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    std::map<Index, std::string> acc;
    for (auto p = arp[i]; p < arp[i + 1]; ++p) {
      auto k = join[a.col_index()[p]];
      if (k == kernels::kNoJoin) continue;
      std::string piece =
          mode == MultiplyMode::CatKey ? a.col_keys()[a.col_index()[p]].render() : a.value(p).render();
      for (auto q = brp[k]; q < brp[k + 1]; ++q) {
        auto& s = acc[b.col_index()[q]];
        if (!s.empty()) s += kConcatDelimiter;
        if (mode == MultiplyMode::CatKey) {
          s += piece;
        } else {
          s += piece;
          s += '*';
          s += b.value(q).render();
        }
      }
    }
    out_rows[i].assign(std::make_move_iterator(acc.begin()), std::make_move_iterator(acc.end()));
  }
  std::vector<std::size_t> row_ptr{0};
  std::vector<Index> col;
  std::vector<std::string> text;
  for (auto& r : out_rows) {
    for (auto& [c, s] : r) {
      col.push_back(c);
      text.push_back(std::move(s));
    }
    row_ptr.push_back(col.size());
  }
  return AssocBuilder::make(a.row_keys(), b.col_keys(), std::move(row_ptr), std::move(col), {},
                            std::move(text), ValueKind::Text);
}

}  // namespace

Assoc matmul(const Assoc& a0, const Assoc& b0, MultiplyMode mode) {
  if (mode == MultiplyMode::Arith) {
    Assoc a = numeric_view(a0), b = numeric_view(b0);
    auto join = inner_join(a.col_keys(), b.row_keys());
    return Assoc::from_csr(a.row_keys(), b.col_keys(), kernels::parallel::spgemm(a.csr(), b.csr(), join));
  }
  if (mode == MultiplyMode::CatVal && !a0.empty() && !b0.empty() && a0.kind() != b0.kind()) {
    throw Error(ErrorCode::MixedValueVariant, "CatVal multiply needs operands of one value kind");
  }
  return concat_multiply(a0, b0, mode);
}

Assoc transpose(const Assoc& a) {
  // Transpose entry positions, then gather the payload in the new order.
  Csr pos;
  pos.ncols = a.col_keys().size();
  pos.row_ptr.assign(a.row_ptr().begin(), a.row_ptr().end());
  pos.col.assign(a.col_index().begin(), a.col_index().end());
  pos.val.resize(a.nnz());
  std::iota(pos.val.begin(), pos.val.end(), 0.0);
  Csr t = kernels::parallel::transpose(pos);
  std::vector<double> num;
  std::vector<std::string> text;
  if (a.is_numeric()) {
    num.resize(t.val.size());
    for (std::size_t p = 0; p < t.val.size(); ++p) num[p] = a.numbers()[static_cast<std::size_t>(t.val[p])];
  } else {
    text.resize(t.val.size());
    for (std::size_t p = 0; p < t.val.size(); ++p) text[p] = a.texts()[static_cast<std::size_t>(t.val[p])];
  }
  return AssocBuilder::make(a.col_keys(), a.row_keys(), std::move(t.row_ptr), std::move(t.col),
                            std::move(num), std::move(text), a.kind());
}

Assoc logical(const Assoc& a) {
  std::vector<double> ones(a.nnz(), 1.0);
  return AssocBuilder::make(a.row_keys(), a.col_keys(), {a.row_ptr().begin(), a.row_ptr().end()},
                            {a.col_index().begin(), a.col_index().end()}, std::move(ones), {},
                            ValueKind::Number);
}

Assoc reduce_rows(const Assoc& a0) {
  Assoc a = numeric_view(a0);
  auto sums = kernels::parallel::row_sums(a.csr());
  Csr m;
  m.ncols = 1;
  m.row_ptr.resize(sums.size() + 1);
  for (std::size_t i = 0; i < sums.size(); ++i) {
    m.row_ptr[i + 1] = i + 1;
    m.col.push_back(0);
    m.val.push_back(sums[i]);
  }
  return Assoc::from_csr(a.row_keys(), {degree_key()}, std::move(m));
}

Assoc reduce_cols(const Assoc& a0) {
  Assoc a = numeric_view(a0);
  auto sums = kernels::parallel::col_sums(a.csr());
  Csr m;
  m.ncols = sums.size();
  m.row_ptr = {0, sums.size()};
  for (std::size_t c = 0; c < sums.size(); ++c) {
    m.col.push_back(static_cast<Index>(c));
    m.val.push_back(sums[c]);
  }
  return Assoc::from_csr({degree_key()}, a.col_keys(), std::move(m));
}

Assoc identity(std::span<const Key> keys) {
  auto ks = sorted_unique({keys.begin(), keys.end()});
  Csr m;
  m.ncols = ks.size();
  m.row_ptr.resize(ks.size() + 1);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    m.row_ptr[i + 1] = i + 1;
    m.col.push_back(static_cast<Index>(i));
    m.val.push_back(1.0);
  }
  return Assoc::from_csr(ks, ks, std::move(m));
}

}  // namespace d4m
