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

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "d4m/assoc.hpp"
#include "d4m/graph.hpp"
#include "d4m/kv/store.hpp"
#include "d4m/memory.hpp"

namespace d4m::algo {

/// Local runs on in-memory bundles; Server runs inside a kv store and
/// brings only frontiers and final results back to the client.
enum class Mode { Local, Server };

std::string_view to_string(Mode m) noexcept;
Mode parse_mode(std::string_view name);

struct BFSParams {
  std::vector<Key> starts;
  int hops = 1;
  double min_degree = 0;
  double max_degree = std::numeric_limits<double>::infinity();
  Key degree_column = Key("deg");

  void validate() const;
};

/// reached: (vertex, "hop") -> first hop index, start vertices excluded.
/// traversed_edges: (u, v) -> edge weight for every edge crossed from a
/// degree-admitted frontier vertex u to a newly reached vertex v.
struct BFSResult {
  Assoc reached;
  Assoc traversed_edges;
};

struct TrussParams {
  int k = 3;

  void validate() const;
};

inline const Key& hop_key() {
  static const Key k("hop");
  return k;
}

// ---- Local mode ----

/// Triangle count of every edge: (L*L) restricted to the pattern of L,
/// where L = logical(adjacency). Edges in no triangle are absent.
Assoc triangle_support(const Assoc& adjacency);

BFSResult adj_bfs(const GraphBundle& g, const BFSParams& p);
BFSResult edge_bfs(const GraphBundle& g, const BFSParams& p);
BFSResult single_table_bfs(const GraphBundle& g, const BFSParams& p);
/// Dispatches on the bundle's schema.
BFSResult bfs(const GraphBundle& g, const BFSParams& p);

/// Strictly upper-triangular Jaccard coefficients of an adjacency bundle.
Assoc jaccard(const GraphBundle& g, MemoryTracker* tracker = nullptr);

GraphBundle ktruss_adj(const GraphBundle& g, const TrussParams& p, MemoryTracker* tracker = nullptr);
GraphBundle ktruss_edge(const GraphBundle& g, const TrussParams& p, MemoryTracker* tracker = nullptr);

// ---- Server mode ----

/// Tables holding one bundle: `<name>` (main), `<name>T` (incidence
/// transpose), `<name>Deg` (degree, adjacency and incidence) and
/// `<name>Schema` (schema tag).
struct StoredGraph {
  Schema schema = Schema::Adjacency;
  std::string name;
  std::string main;
  std::string transpose;
  std::string degree;
};

StoredGraph store_graph(kv::Store& store, const std::string& name, const GraphBundle& g);
/// Locates a stored bundle; MissingTable if it was never ingested.
StoredGraph open_graph(kv::Store& store, const std::string& name);
/// Scans and materializes every table of the bundle.
GraphBundle load_graph(kv::Store& store, const StoredGraph& sg);

BFSResult adj_bfs(kv::Store& store, const StoredGraph& g, const BFSParams& p);
BFSResult edge_bfs(kv::Store& store, const StoredGraph& g, const BFSParams& p);
BFSResult single_table_bfs(kv::Store& store, const StoredGraph& g, const BFSParams& p);
BFSResult bfs(kv::Store& store, const StoredGraph& g, const BFSParams& p);

Assoc jaccard(kv::Store& store, const StoredGraph& g);

GraphBundle ktruss_adj(kv::Store& store, const StoredGraph& g, const TrussParams& p);
GraphBundle ktruss_edge(kv::Store& store, const StoredGraph& g, const TrussParams& p);

}  // namespace d4m::algo
