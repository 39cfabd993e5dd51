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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "d4m/assoc.hpp"

namespace d4m {

enum class Schema { Adjacency, Incidence, SingleTable };

std::string_view to_string(Schema s) noexcept;
Schema parse_schema(std::string_view name);

struct Edge {
  Key u;
  Key v;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct EdgeList {
  std::vector<Edge> edges;
  bool directed = false;
};

/// Drops self-loops, orients undirected edges so that u < v, and merges
/// parallel edges by summing weights (first occurrence fixes the order).
/// Edges whose merged weight is zero vanish.
EdgeList normalize(EdgeList e);

EdgeList edges_from_triples(std::span<const Triple> triples, bool directed = false);
std::vector<Triple> edges_to_triples(const EdgeList& e);

/// Schema-tagged set of tables describing one graph.
///
/// Adjacency: `main` is vertex x vertex with edge weights, `degree` holds
/// (vertex, "deg") = distinct-neighbour count.
/// Incidence: `main` is edge-id x vertex with the edge weight at both
/// endpoints, `transpose_table` its transpose, `degree` as for adjacency.
/// SingleTable: `main` rows are vertices with a "deg" column plus one
/// "edge|w" column per neighbour w; `degree` is left empty.
struct GraphBundle {
  Schema schema = Schema::Adjacency;
  Assoc main;
  std::optional<Assoc> transpose_table;
  Assoc degree;
  bool directed = false;
};

inline constexpr std::string_view kEdgeColumnPrefix = "edge|";
inline constexpr int kEdgeIdWidth = 7;

/// 1-based edge index rendered as a zero-padded row key.
std::string edge_row_key(std::size_t index);

GraphBundle build_adjacency(const EdgeList& e);
GraphBundle build_incidence(const EdgeList& e);
GraphBundle build_single_table(const EdgeList& e);
GraphBundle build(const EdgeList& e, Schema schema);

/// Recovers the normalized edge list a bundle encodes.
EdgeList to_edge_list(const GraphBundle& g);

GraphBundle convert(const GraphBundle& g, Schema target);

/// (vertex, "deg") table for any schema.
Assoc degree_table(const GraphBundle& g);

/// Adjacency main of the graph, whatever the source schema.
Assoc canonical_adjacency(const GraphBundle& g);

/// Number of undirected edges (or directed arcs) the bundle holds.
std::size_t edge_count(const GraphBundle& g);

}  // namespace d4m
