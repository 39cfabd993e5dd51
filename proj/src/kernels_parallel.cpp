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
#include <atomic>
#include <numeric>

#include <omp.h>

#include "d4m/kernels.hpp"

namespace d4m::kernels::parallel {

namespace {

struct RowBuffer {
  std::vector<Index> col;
  std::vector<double> val;
};

// Concatenates per-row outputs into one CSR.
Csr assemble(std::vector<RowBuffer>& rows, std::size_t ncols) {
  Csr out;
  out.ncols = ncols;
  out.row_ptr.assign(rows.size() + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row_ptr[i + 1] = out.row_ptr[i] + rows[i].col.size();
  out.col.resize(out.row_ptr.back());
  out.val.resize(out.row_ptr.back());
  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::copy(r.col.begin(), r.col.end(), out.col.begin() + out.row_ptr[i]);
    std::copy(r.val.begin(), r.val.end(), out.val.begin() + out.row_ptr[i]);
    r = RowBuffer{};
  }
  return out;
}

}  // namespace

Csr spgemm(CsrView a, CsrView b, std::span<const std::int64_t> join) {
  const auto n = static_cast<std::int64_t>(a.nrows());
  std::vector<RowBuffer> rows(a.nrows());
#pragma omp parallel
  {
    std::vector<double> acc(b.ncols, 0.0);
    std::vector<char> seen(b.ncols, 0);
    std::vector<Index> touched;
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
      touched.clear();
      for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
        auto k = join[a.col[p]];
        if (k == kNoJoin) continue;
        const double av = a.val[p];
        for (auto q = b.row_ptr[k]; q < b.row_ptr[k + 1]; ++q) {
          auto c = b.col[q];
          if (!seen[c]) {
            seen[c] = 1;
            touched.push_back(c);
          }
          acc[c] += av * b.val[q];
        }
      }
      std::sort(touched.begin(), touched.end());
      auto& r = rows[i];
      for (auto c : touched) {
        if (acc[c] != 0.0) {
          r.col.push_back(c);
          r.val.push_back(acc[c]);
        }
        acc[c] = 0.0;
        seen[c] = 0;
      }
    }
  }
  return assemble(rows, b.ncols);
}

Csr ewise(CsrView a, CsrView b, EwiseOp op) {
  const auto n = static_cast<std::int64_t>(a.nrows());
  std::vector<RowBuffer> rows(a.nrows());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) {
    auto p = a.row_ptr[i], pe = a.row_ptr[i + 1];
    auto q = b.row_ptr[i], qe = b.row_ptr[i + 1];
    auto& r = rows[i];
    auto emit = [&](Index c, double v) {
      if (v != 0.0) {
        r.col.push_back(c);
        r.val.push_back(v);
      }
    };
    while (p < pe || q < qe) {
      bool take_a = q == qe || (p < pe && a.col[p] < b.col[q]);
      bool take_b = p == pe || (q < qe && b.col[q] < a.col[p]);
      if (take_a) {
        double v = a.val[p];
        if (op == EwiseOp::Or) v = 1.0;
        if (op != EwiseOp::And) emit(a.col[p], v);
        ++p;
      } else if (take_b) {
        double v = b.val[q];
        if (op == EwiseOp::Sub) v = -v;
        if (op == EwiseOp::Or) v = 1.0;
        if (op != EwiseOp::And) emit(b.col[q], v);
        ++q;
      } else {
        double x = a.val[p], y = b.val[q];
        double v = 0.0;
        switch (op) {
          case EwiseOp::Add: v = x + y; break;
          case EwiseOp::Sub: v = x - y; break;
          case EwiseOp::And: v = (x != 0.0 && y != 0.0) ? 1.0 : 0.0; break;
          case EwiseOp::Or: v = 1.0; break;
        }
        emit(a.col[p], v);
        ++p;
        ++q;
      }
    }
  }
  return assemble(rows, a.ncols);
}

std::vector<double> row_sums(CsrView a) {
  const auto n = static_cast<std::int64_t>(a.nrows());
  std::vector<double> s(a.nrows(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) acc += a.val[p];
    s[i] = acc;
  }
  return s;
}

std::vector<double> col_sums(CsrView a) {
  // Column sums go through the transpose so every column is summed in row
  // order, matching the serial reference bit for bit.
  Csr t = transpose(a);
  return row_sums(t);
}

Csr transpose(CsrView a) {
  Csr out;
  out.ncols = a.nrows();
  out.row_ptr.assign(a.ncols + 1, 0);
  for (auto c : a.col) ++out.row_ptr[c + 1];
  std::partial_sum(out.row_ptr.begin(), out.row_ptr.end(), out.row_ptr.begin());
  out.col.resize(a.col.size());
  out.val.resize(a.col.size());

  std::vector<std::atomic<std::size_t>> cursor(a.ncols);
  for (std::size_t c = 0; c < a.ncols; ++c) cursor[c].store(out.row_ptr[c], std::memory_order_relaxed);
  const auto n = static_cast<std::int64_t>(a.nrows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      auto slot = cursor[a.col[p]].fetch_add(1, std::memory_order_relaxed);
      out.col[slot] = static_cast<Index>(i);
      out.val[slot] = a.val[p];
    }
  }
  // Scatter order is nondeterministic across threads; restore row order.
  const auto m = static_cast<std::int64_t>(a.ncols);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t r = 0; r < m; ++r) {
    auto lo = out.row_ptr[r], hi = out.row_ptr[r + 1];
    if (std::is_sorted(out.col.begin() + lo, out.col.begin() + hi)) continue;
    std::vector<std::pair<Index, double>> tmp;
    tmp.reserve(hi - lo);
    for (auto p = lo; p < hi; ++p) tmp.emplace_back(out.col[p], out.val[p]);
    std::sort(tmp.begin(), tmp.end(), [](auto& x, auto& y) { return x.first < y.first; });
    for (auto p = lo; p < hi; ++p) {
      out.col[p] = tmp[p - lo].first;
      out.val[p] = tmp[p - lo].second;
    }
  }
  return out;
}

}  // namespace d4m::kernels::parallel
