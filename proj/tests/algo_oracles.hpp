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

// Brute-force references for the graph algorithms, written against plain
// adjacency lists so they share no code with the matrix formulations.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "d4m/algos.hpp"
#include "d4m/gen.hpp"
#include "d4m/graph.hpp"

namespace d4m::oracle {

struct Graph {
  std::map<Key, std::map<Key, double>> nbr;  // undirected, no self loops

  explicit Graph(const EdgeList& e) {
    for (const auto& ed : e.edges) {
      if (ed.u == ed.v) continue;
      nbr[ed.u][ed.v] += ed.weight;
      nbr[ed.v][ed.u] += ed.weight;
    }
  }
  double degree(const Key& v) const {
    auto it = nbr.find(v);
    return it == nbr.end() ? 0.0 : static_cast<double>(it->second.size());
  }
};

inline algo::BFSResult bfs(const Graph& g, const algo::BFSParams& p) {
  std::set<Key> seen(p.starts.begin(), p.starts.end());
  std::vector<Key> level(seen.begin(), seen.end());
  std::vector<Triple> reached, crossed;
  for (int h = 1; h <= p.hops && !level.empty(); ++h) {
    std::vector<Key> admitted;
    for (const auto& v : level) {
      double d = g.degree(v);
      if (d >= p.min_degree && d <= p.max_degree) admitted.push_back(v);
    }
    std::set<Key> fresh;
    for (const auto& u : admitted) {
      auto it = g.nbr.find(u);
      if (it == g.nbr.end()) continue;
      for (const auto& [v, w] : it->second) {
        if (!seen.count(v)) fresh.insert(v);
      }
    }
    for (const auto& u : admitted) {
      auto it = g.nbr.find(u);
      if (it == g.nbr.end()) continue;
      for (const auto& [v, w] : it->second) {
        if (fresh.count(v)) crossed.push_back({u, v, w});
      }
    }
    for (const auto& v : fresh) {
      seen.insert(v);
      reached.push_back({v, algo::hop_key(), h});
    }
    level.assign(fresh.begin(), fresh.end());
  }
  return {Assoc::from_triples(reached), Assoc::from_triples(crossed)};
}

/// Full symmetric Jaccard map over pairs with a shared neighbour.
inline std::map<std::pair<Key, Key>, double> jaccard(const Graph& g) {
  std::map<std::pair<Key, Key>, double> out;
  for (const auto& [u, nu] : g.nbr) {
    for (const auto& [v, nv] : g.nbr) {
      if (u == v) continue;
      std::size_t common = 0;
      for (const auto& [w, _] : nu) common += nv.count(w);
      if (common == 0) continue;
      std::set<Key> uni;
      for (const auto& [w, _] : nu) uni.insert(w);
      for (const auto& [w, _] : nv) uni.insert(w);
      out[{u, v}] = static_cast<double>(common) / static_cast<double>(uni.size());
    }
  }
  return out;
}

/// Triangles through each undirected edge, keyed with u < v.
inline std::map<std::pair<Key, Key>, int> triangle_counts(const std::set<std::pair<Key, Key>>& edges) {
  std::map<Key, std::set<Key>> adj;
  for (const auto& [u, v] : edges) {
    adj[u].insert(v);
    adj[v].insert(u);
  }
  std::map<std::pair<Key, Key>, int> out;
  for (const auto& [u, v] : edges) {
    int c = 0;
    for (const auto& w : adj[u]) c += adj[v].count(w) ? 1 : 0;
    out[{u, v}] = c;
  }
  return out;
}

/// Surviving undirected edges (u < v) of the k-truss, batch deletion.
inline std::set<std::pair<Key, Key>> truss(const Graph& g, int k) {
  std::set<std::pair<Key, Key>> edges;
  for (const auto& [u, nu] : g.nbr) {
    for (const auto& [v, _] : nu) {
      if (u < v) edges.emplace(u, v);
    }
  }
  if (k <= 2) return edges;
  for (;;) {
    auto tri = triangle_counts(edges);
    std::set<std::pair<Key, Key>> keep;
    for (const auto& [e, c] : tri) {
      if (c >= k - 2) keep.insert(e);
    }
    if (keep.size() == edges.size()) return edges;
    edges = std::move(keep);
  }
}

/// Undirected edge set (u < v) of an adjacency Assoc.
inline std::set<std::pair<Key, Key>> upper_edges(const Assoc& adjacency) {
  std::set<std::pair<Key, Key>> s;
  for (const auto& t : adjacency.to_triples()) {
    if (t.row < t.col) s.emplace(t.row, t.col);
  }
  return s;
}

/// Random simple graph over up to `max_vertices` vertices.
inline EdgeList random_graph(std::mt19937_64& rng, std::size_t max_vertices) {
  std::uniform_int_distribution<std::size_t> nv(2, max_vertices);
  std::size_t n = nv(rng);
  std::uniform_real_distribution<double> density(0.02, 0.4);
  std::bernoulli_distribution pick(density(rng));
  EdgeList e;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pick(rng)) e.edges.push_back({Key("v" + std::to_string(i)), Key("v" + std::to_string(j)), 1.0});
    }
  }
  return normalize(std::move(e));
}

inline EdgeList generated(int scale, std::uint64_t seed) {
  gen::GenConfig cfg;
  cfg.scale = scale;
  cfg.seed = seed;
  return normalize(gen::generate(cfg));
}

/// Five distinct vertices drawn from the graph with a seeded stream.
inline std::vector<Key> pick_starts(const EdgeList& e, std::uint64_t seed, std::size_t n = 5) {
  std::set<Key> vs;
  for (const auto& ed : e.edges) {
    vs.insert(ed.u);
    vs.insert(ed.v);
  }
  std::vector<Key> all(vs.begin(), vs.end());
  std::vector<Key> out;
  gen::CounterStream s(seed);
  for (std::uint64_t i = 0; out.size() < std::min(n, all.size()); ++i) {
    const Key& k = all[s.bits(i) % all.size()];
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

}  // namespace d4m::oracle
