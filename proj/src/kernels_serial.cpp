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

#include <map>

#include "d4m/kernels.hpp"

namespace d4m::kernels::serial {

namespace {

void append_row(Csr& out, const std::map<Index, double>& row) {
  for (const auto& [c, v] : row) {
    if (v == 0.0) continue;
    out.col.push_back(c);
    out.val.push_back(v);
  }
  out.row_ptr.push_back(out.col.size());
}

std::map<Index, double> row_map(CsrView a, std::size_t i) {
  std::map<Index, double> m;
  for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) m.emplace(a.col[p], a.val[p]);
  return m;
}

}  // namespace

Csr spgemm(CsrView a, CsrView b, std::span<const std::int64_t> join) {
  Csr out;
  out.ncols = b.ncols;
  for (std::size_t i = 0; i < a.nrows(); ++i) {
    std::map<Index, double> acc;
    for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      auto k = join[a.col[p]];
      if (k == kNoJoin) continue;
      for (auto q = b.row_ptr[k]; q < b.row_ptr[k + 1]; ++q) acc[b.col[q]] += a.val[p] * b.val[q];
    }
    append_row(out, acc);
  }
  return out;
}

Csr ewise(CsrView a, CsrView b, EwiseOp op) {
  Csr out;
  out.ncols = a.ncols;
  for (std::size_t i = 0; i < a.nrows(); ++i) {
    auto ra = row_map(a, i);
    auto rb = row_map(b, i);
    std::map<Index, double> r;
    switch (op) {
      case EwiseOp::Add:
        r = ra;
        for (auto& [c, v] : rb) r[c] += v;
        break;
      case EwiseOp::Sub:
        r = ra;
        for (auto& [c, v] : rb) r[c] -= v;
        break;
      case EwiseOp::And:
        for (auto& [c, v] : ra)
          if (rb.count(c) && v != 0.0 && rb[c] != 0.0) r[c] = 1.0;
        break;
      case EwiseOp::Or:
        for (auto& [c, v] : ra) r[c] = 1.0;
        for (auto& [c, v] : rb) r[c] = 1.0;
        break;
    }
    append_row(out, r);
  }
  return out;
}

std::vector<double> row_sums(CsrView a) {
  std::vector<double> s(a.nrows(), 0.0);
  for (std::size_t i = 0; i < a.nrows(); ++i)
    for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) s[i] += a.val[p];
  return s;
}

std::vector<double> col_sums(CsrView a) {
  std::vector<double> s(a.ncols, 0.0);
  for (std::size_t i = 0; i < a.nrows(); ++i)
    for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) s[a.col[p]] += a.val[p];
  return s;
}

Csr transpose(CsrView a) {
  std::vector<std::map<Index, double>> rows(a.ncols);
  for (std::size_t i = 0; i < a.nrows(); ++i)
    for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
      rows[a.col[p]].emplace(static_cast<Index>(i), a.val[p]);
  Csr out;
  out.ncols = a.nrows();
  for (const auto& r : rows) {
    for (const auto& [c, v] : r) {
      out.col.push_back(c);
      out.val.push_back(v);
    }
    out.row_ptr.push_back(out.col.size());
  }
  return out;
}

}  // namespace d4m::kernels::serial
