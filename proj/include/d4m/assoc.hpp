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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "d4m/kernels.hpp"
#include "d4m/key.hpp"
#include "d4m/selector.hpp"

namespace d4m {

/// How fromTriples resolves repeated (row, col) pairs.
enum class CollisionRule { SumNumeric, First, Last, ConcatText };

/// Matrix-multiply flavours: plus-times, concatenation of the joining inner
/// keys, and concatenation of rendered "a*b" value pairs.
enum class MultiplyMode { Arith, CatKey, CatVal };

using kernels::EwiseOp;

/// Separator used by ConcatText collisions and the concatenating multiplies.
inline constexpr char kConcatDelimiter = ';';

/// Immutable sparse associative array.
///
/// Row and column keys are strictly ascending and condensed: every listed
/// key carries at least one entry. Zero numbers and empty texts are never
/// stored. All values share one ValueKind; an empty array reports Number.
class Assoc {
 public:
  Assoc() = default;

  static Assoc from_triples(std::span<const Triple> triples,
                            std::optional<CollisionRule> rule = std::nullopt);

  /// Builds a numeric array from a CSR over the given key lists. Keys need
  /// not be condensed and the CSR may hold zeros; both are cleaned up.
  static Assoc from_csr(std::vector<Key> rows, std::vector<Key> cols, kernels::Csr m);

  std::vector<Triple> to_triples() const;

  const std::vector<Key>& row_keys() const noexcept { return rows_; }
  const std::vector<Key>& col_keys() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return col_.size(); }
  bool empty() const noexcept { return col_.empty(); }
  ValueKind kind() const noexcept { return kind_; }
  bool is_numeric() const noexcept { return kind_ == ValueKind::Number; }

  std::optional<Value> at(const Key& row, const Key& col) const;
  Value value(std::size_t entry) const;

  /// CSR view of the numeric payload; requires is_numeric().
  kernels::CsrView csr() const;
  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const kernels::Index> col_index() const noexcept { return col_; }
  std::span<const double> numbers() const noexcept { return num_; }
  std::span<const std::string> texts() const noexcept { return text_; }

  /// Approximate heap footprint, used for working-set accounting.
  std::size_t byte_size() const noexcept;

  friend bool operator==(const Assoc&, const Assoc&) = default;

 private:
  friend class AssocBuilder;

  void condense();

  std::vector<Key> rows_;
  std::vector<Key> cols_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<kernels::Index> col_;
  std::vector<double> num_;
  std::vector<std::string> text_;
  ValueKind kind_ = ValueKind::Number;
};

Assoc select(const Assoc& a, const Selector& rows, const Selector& cols);
Assoc equals_value(const Assoc& a, const Value& v);
Assoc elementwise(const Assoc& a, const Assoc& b, EwiseOp op);
Assoc matmul(const Assoc& a, const Assoc& b, MultiplyMode mode = MultiplyMode::Arith);
Assoc transpose(const Assoc& a);
Assoc logical(const Assoc& a);

/// Per-row sums in column "deg".
Assoc reduce_rows(const Assoc& a);
/// Per-column sums in row "deg".
Assoc reduce_cols(const Assoc& a);

Assoc identity(std::span<const Key> keys);

inline const Key& degree_key() {
  static const Key k("deg");
  return k;
}

inline Assoc operator+(const Assoc& a, const Assoc& b) { return elementwise(a, b, EwiseOp::Add); }
inline Assoc operator-(const Assoc& a, const Assoc& b) { return elementwise(a, b, EwiseOp::Sub); }
inline Assoc operator&(const Assoc& a, const Assoc& b) { return elementwise(a, b, EwiseOp::And); }
inline Assoc operator|(const Assoc& a, const Assoc& b) { return elementwise(a, b, EwiseOp::Or); }
inline Assoc operator*(const Assoc& a, const Assoc& b) { return matmul(a, b); }

}  // namespace d4m
