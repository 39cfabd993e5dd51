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

#include "d4m/graph.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "d4m/error.hpp"

namespace d4m {

std::string_view to_string(Schema s) noexcept {
  switch (s) {
    case Schema::Adjacency: return "adjacency";
    case Schema::Incidence: return "incidence";
    case Schema::SingleTable: return "single";
  }
  return "?";
}

Schema parse_schema(std::string_view name) {
  if (name == "adjacency") return Schema::Adjacency;
  if (name == "incidence") return Schema::Incidence;
  if (name == "single") return Schema::SingleTable;
  throw Error(ErrorCode::InvalidArgument, "unknown schema '" + std::string(name) + "'");
}

EdgeList normalize(EdgeList e) {
  std::map<std::pair<Key, Key>, std::size_t> slot;
  EdgeList out;
  out.directed = e.directed;
  for (auto& edge : e.edges) {
    if (edge.u == edge.v) continue;
    if (!e.directed && edge.v < edge.u) std::swap(edge.u, edge.v);
    auto [it, fresh] = slot.try_emplace({edge.u, edge.v}, out.edges.size());
    if (fresh) {
      out.edges.push_back(std::move(edge));
    } else {
      out.edges[it->second].weight += edge.weight;
    }
  }
  std::erase_if(out.edges, [](const Edge& x) { return x.weight == 0.0; });
  return out;
}

EdgeList edges_from_triples(std::span<const Triple> triples, bool directed) {
  EdgeList e;
  e.directed = directed;
  for (const auto& t : triples) {
    if (!t.val.is_number()) throw Error(ErrorCode::MixedValueVariant, "edge weights must be numeric");
    e.edges.push_back({t.row, t.col, t.val.number()});
  }
  return e;
}

std::vector<Triple> edges_to_triples(const EdgeList& e) {
  std::vector<Triple> t;
  t.reserve(e.edges.size());
  for (const auto& edge : e.edges) t.push_back({edge.u, edge.v, Value(edge.weight)});
  return t;
}

std::string edge_row_key(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() > static_cast<std::size_t>(kEdgeIdWidth)) {
    throw Error(ErrorCode::InvalidArgument, "edge count exceeds the edge-id width");
  }
  return std::string(kEdgeIdWidth - digits.size(), '0') + digits;
}

namespace {

EdgeList checked_normalized(const EdgeList& e) {
  for (const auto& edge : e.edges) {
    if (edge.u == edge.v) throw Error(ErrorCode::SelfLoop, "self-loop at vertex " + edge.u.render());
  }
  return normalize(e);
}

Assoc adjacency_main(const EdgeList& n) {
  std::vector<Triple> t;
  t.reserve(n.edges.size() * 2);
  for (const auto& edge : n.edges) {
    t.push_back({edge.u, edge.v, Value(edge.weight)});
    if (!n.directed) t.push_back({edge.v, edge.u, Value(edge.weight)});
  }
  return Assoc::from_triples(t, CollisionRule::SumNumeric);
}

void require_undirected(const EdgeList& e, Schema s) {
  if (e.directed) {
    throw Error(ErrorCode::SchemaMismatch, std::string(to_string(s)) + " schema stores undirected graphs only");
  }
}

}  // namespace

GraphBundle build_adjacency(const EdgeList& e) {
  EdgeList n = checked_normalized(e);
  GraphBundle g;
  g.schema = Schema::Adjacency;
  g.directed = n.directed;
  g.main = adjacency_main(n);
  g.degree = reduce_rows(logical(g.main));
  return g;
}

GraphBundle build_incidence(const EdgeList& e) {
  require_undirected(e, Schema::Incidence);
  EdgeList n = checked_normalized(e);
  std::vector<Triple> t;
  t.reserve(n.edges.size() * 2);
  for (std::size_t i = 0; i < n.edges.size(); ++i) {
    Key id(edge_row_key(i + 1));
    t.push_back({id, n.edges[i].u, Value(n.edges[i].weight)});
    t.push_back({id, n.edges[i].v, Value(n.edges[i].weight)});
  }
  GraphBundle g;
  g.schema = Schema::Incidence;
  g.main = Assoc::from_triples(t);
  g.transpose_table = transpose(g.main);
  g.degree = reduce_rows(logical(adjacency_main(n)));
  return g;
}

GraphBundle build_single_table(const EdgeList& e) {
  require_undirected(e, Schema::SingleTable);
  EdgeList n = checked_normalized(e);
  auto check_key = [](const Key& k) {
    if (!k.is_text()) throw Error(ErrorCode::InvalidKey, "single-table vertex keys must be text");
    if (k == degree_key() || k.text().starts_with(kEdgeColumnPrefix)) {
      throw Error(ErrorCode::ReservedKeyCollision, "vertex key '" + k.text() + "' is reserved");
    }
  };
  std::vector<Triple> t;
  t.reserve(n.edges.size() * 2);
  for (const auto& edge : n.edges) {
    check_key(edge.u);
    check_key(edge.v);
    t.push_back({edge.u, Key(std::string(kEdgeColumnPrefix) + edge.v.text()), Value(edge.weight)});
    t.push_back({edge.v, Key(std::string(kEdgeColumnPrefix) + edge.u.text()), Value(edge.weight)});
  }
  for (const auto& d : reduce_rows(logical(Assoc::from_triples(t))).to_triples()) t.push_back(d);
  GraphBundle g;
  g.schema = Schema::SingleTable;
  g.main = Assoc::from_triples(t);
  return g;
}

GraphBundle build(const EdgeList& e, Schema schema) {
  switch (schema) {
    case Schema::Adjacency: return build_adjacency(e);
    case Schema::Incidence: return build_incidence(e);
    case Schema::SingleTable: return build_single_table(e);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown schema");
}

EdgeList to_edge_list(const GraphBundle& g) {
  EdgeList out;
  out.directed = g.directed;
  const Assoc& m = g.main;
  auto rp = m.row_ptr();
  auto cx = m.col_index();
  auto val = m.numbers();
  switch (g.schema) {
    case Schema::Adjacency:
      for (std::size_t i = 0; i < m.row_keys().size(); ++i) {
        for (auto p = rp[i]; p < rp[i + 1]; ++p) {
          const Key& u = m.row_keys()[i];
          const Key& v = m.col_keys()[cx[p]];
          if (g.directed || u < v) out.edges.push_back({u, v, val[p]});
        }
      }
      break;
    case Schema::Incidence:
      for (std::size_t i = 0; i < m.row_keys().size(); ++i) {
        if (rp[i + 1] - rp[i] != 2 || val[rp[i]] != val[rp[i] + 1]) {
          throw Error(ErrorCode::SchemaMismatch, "incidence row " + m.row_keys()[i].render() +
                                                     " is not a two-endpoint edge");
        }
        out.edges.push_back({m.col_keys()[cx[rp[i]]], m.col_keys()[cx[rp[i] + 1]], val[rp[i]]});
      }
      break;
    case Schema::SingleTable:
      for (std::size_t i = 0; i < m.row_keys().size(); ++i) {
        for (auto p = rp[i]; p < rp[i + 1]; ++p) {
          const Key& c = m.col_keys()[cx[p]];
          if (!c.is_text() || !c.text().starts_with(kEdgeColumnPrefix)) continue;
          Key v(c.text().substr(kEdgeColumnPrefix.size()));
          if (m.row_keys()[i] < v) out.edges.push_back({m.row_keys()[i], std::move(v), val[p]});
        }
      }
      break;
  }
  return out;
}

GraphBundle convert(const GraphBundle& g, Schema target) { return build(to_edge_list(g), target); }

Assoc degree_table(const GraphBundle& g) {
  if (g.schema == Schema::SingleTable) return select(g.main, Selector::all(), Selector::list({degree_key()}));
  return g.degree;
}

Assoc canonical_adjacency(const GraphBundle& g) {
  if (g.schema == Schema::Adjacency) return g.main;
  return build_adjacency(to_edge_list(g)).main;
}

std::size_t edge_count(const GraphBundle& g) {
  switch (g.schema) {
    case Schema::Adjacency: return g.directed ? g.main.nnz() : g.main.nnz() / 2;
    case Schema::Incidence: return g.main.row_keys().size();
    case Schema::SingleTable: return (g.main.nnz() - g.main.row_keys().size()) / 2;
  }
  return 0;
}

}  // namespace d4m
