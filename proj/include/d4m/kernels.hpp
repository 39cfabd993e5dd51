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
#include <cstdint>
#include <span>
#include <vector>

// Numeric sparse kernels behind the associative-array algebra. Each kernel
// exists twice: `serial` is an ordered-map reference kept for testing, and
// `parallel` is the OpenMP implementation the library actually calls.
// Both must produce identical CSR output (sorted columns, no explicit zeros).

namespace d4m::kernels {

using Index = std::uint32_t;

struct Csr {
  std::size_t ncols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<Index> col;
  std::vector<double> val;

  std::size_t nrows() const noexcept { return row_ptr.size() - 1; }
  std::size_t nnz() const noexcept { return col.size(); }
  friend bool operator==(const Csr&, const Csr&) = default;
};

struct CsrView {
  std::size_t ncols = 0;
  std::span<const std::size_t> row_ptr;
  std::span<const Index> col;
  std::span<const double> val;

  CsrView() = default;
  CsrView(const Csr& m) : ncols(m.ncols), row_ptr(m.row_ptr), col(m.col), val(m.val) {}
  CsrView(std::size_t nc, std::span<const std::size_t> rp, std::span<const Index> c,
          std::span<const double> v)
      : ncols(nc), row_ptr(rp), col(c), val(v) {}
  std::size_t nrows() const noexcept { return row_ptr.empty() ? 0 : row_ptr.size() - 1; }
};

/// Marks entries of B's rows that do not join any column of A.
inline constexpr std::int64_t kNoJoin = -1;

enum class EwiseOp { Add, Sub, And, Or };

namespace serial {
/// C = A * B over plus-times; `join[k]` is the B row matched to A column k.
Csr spgemm(CsrView a, CsrView b, std::span<const std::int64_t> join);
/// A and B must share row and column spaces.
Csr ewise(CsrView a, CsrView b, EwiseOp op);
std::vector<double> row_sums(CsrView a);
std::vector<double> col_sums(CsrView a);
Csr transpose(CsrView a);
}  // namespace serial

namespace parallel {
Csr spgemm(CsrView a, CsrView b, std::span<const std::int64_t> join);
Csr ewise(CsrView a, CsrView b, EwiseOp op);
std::vector<double> row_sums(CsrView a);
std::vector<double> col_sums(CsrView a);
Csr transpose(CsrView a);
}  // namespace parallel

}  // namespace d4m::kernels
