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

#include <functional>
#include <set>
#include <string_view>
#include <vector>

#include "d4m/algos.hpp"

namespace d4m::algo {

/// Entries of `values` at positions where `pattern` has an entry.
Assoc mask_by_pattern(const Assoc& values, const Assoc& pattern);

namespace detail {

inline const Key& frontier_key() {
  static const Key k("frontier");
  return k;
}

inline double jaccard_value(double inter, double du, double dv) { return inter / (du + dv - inter); }

void require_schema(Schema have, Schema want, std::string_view algo);
Key edge_column(const Key& v);
Key strip_edge_column(const Key& c);
Assoc frontier_row(const std::vector<Key>& vs);

/// Adds (from, to, weight) for each two-endpoint edge row joining the sets.
void incidence_crossings(const Assoc& edge_rows, const std::set<Key>& from, const std::set<Key>& to,
                         std::vector<Triple>& out);

/// One hop: frontier in, degree-admitted frontier and its neighbours out.
using StepFn = std::function<void(const std::vector<Key>&, std::vector<Key>&, std::vector<Key>&)>;
/// Appends the edges crossed from admitted vertices to newly reached ones.
using CrossFn = std::function<void(const std::vector<Key>&, const std::vector<Key>&, std::vector<Triple>&)>;

BFSResult run_bfs(const BFSParams& p, const StepFn& step, const CrossFn& crossed);

GraphBundle adjacency_bundle(Assoc main);
/// Incidence bundle of the edge rows whose endpoint pair is in keep_pairs.
GraphBundle incidence_subset(const Assoc& incidence, const Assoc& keep_pairs);

}  // namespace detail
}  // namespace d4m::algo
