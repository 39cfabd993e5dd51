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
#include <set>

#include "algos_common.hpp"
#include "d4m/algos.hpp"
#include "d4m/error.hpp"

namespace d4m::algo {

std::string_view to_string(Mode m) noexcept { return m == Mode::Local ? "local" : "server"; }

Mode parse_mode(std::string_view name) {
  if (name == "local") return Mode::Local;
  if (name == "server") return Mode::Server;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(name) + "'");
}

void BFSParams::validate() const {
  if (hops < 1) throw Error(ErrorCode::InvalidArgument, "hops must be at least 1");
  if (min_degree < 0 || min_degree > max_degree) {
    throw Error(ErrorCode::InvalidArgument, "degree band needs 0 <= min <= max");
  }
}

void TrussParams::validate() const {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k-truss needs k >= 2");
}

namespace detail {

void require_schema(Schema have, Schema want, std::string_view algo) {
  if (have != want) {
    throw Error(ErrorCode::SchemaMismatch, std::string(algo) + " needs the " + std::string(to_string(want)) +
                                               " schema, got " + std::string(to_string(have)));
  }
}

Key edge_column(const Key& v) { return Key(std::string(kEdgeColumnPrefix) + v.render()); }

Key strip_edge_column(const Key& c) { return Key(c.text().substr(kEdgeColumnPrefix.size())); }

Assoc frontier_row(const std::vector<Key>& vs) {
  std::vector<Triple> t;
  t.reserve(vs.size());
  for (const auto& v : vs) t.push_back({frontier_key(), v, 1});
  return Assoc::from_triples(t);
}

void incidence_crossings(const Assoc& edge_rows, const std::set<Key>& from, const std::set<Key>& to,
                         std::vector<Triple>& out) {
  auto rp = edge_rows.row_ptr();
  for (std::size_t r = 0; r < edge_rows.row_keys().size(); ++r) {
    if (rp[r + 1] - rp[r] != 2) continue;
    const Key& a = edge_rows.col_keys()[edge_rows.col_index()[rp[r]]];
    const Key& b = edge_rows.col_keys()[edge_rows.col_index()[rp[r] + 1]];
    Value w = edge_rows.value(rp[r]);
    if (from.count(a) && to.count(b)) out.push_back({a, b, w});
    if (from.count(b) && to.count(a)) out.push_back({b, a, w});
  }
}

BFSResult run_bfs(const BFSParams& p, const StepFn& step, const CrossFn& crossed) {
  p.validate();
  std::set<Key> visited(p.starts.begin(), p.starts.end());
  std::vector<Key> frontier(visited.begin(), visited.end());
  std::vector<Triple> reached, traversed;
  std::vector<Key> filtered, nbrs, next;
  for (int h = 1; h <= p.hops && !frontier.empty(); ++h) {
    filtered.clear();
    nbrs.clear();
    step(frontier, filtered, nbrs);
    if (filtered.empty()) break;
    next.clear();
    for (const auto& v : nbrs) {
      if (!visited.count(v)) next.push_back(v);
    }
    crossed(filtered, next, traversed);
    for (const auto& v : next) {
      visited.insert(v);
      reached.push_back({v, hop_key(), h});
    }
    frontier = next;
  }
  return {Assoc::from_triples(reached), Assoc::from_triples(traversed)};
}

}  // namespace detail

using namespace detail;

namespace {

double degree_at(const Assoc& table, const Key& v, const Key& col) {
  auto x = table.at(v, col);
  return x && x->is_number() ? x->number() : 0.0;
}

std::vector<Key> admit(const std::vector<Key>& frontier, const Assoc& table, const BFSParams& p) {
  std::vector<Key> out;
  for (const auto& v : frontier) {
    double d = degree_at(table, v, p.degree_column);
    if (d >= p.min_degree && d <= p.max_degree) out.push_back(v);
  }
  return out;
}

}  // namespace

BFSResult adj_bfs(const GraphBundle& g, const BFSParams& p) {
  require_schema(g.schema, Schema::Adjacency, "adjBFS");
  Assoc l = logical(g.main);
  auto step = [&](const std::vector<Key>& frontier, std::vector<Key>& filtered, std::vector<Key>& nbrs) {
    filtered = admit(frontier, g.degree, p);
    if (filtered.empty()) return;
    nbrs = matmul(frontier_row(filtered), l).col_keys();
  };
  auto crossed = [&](const std::vector<Key>& from, const std::vector<Key>& to, std::vector<Triple>& out) {
    if (to.empty()) return;
    for (auto& t : select(g.main, Selector::list(from), Selector::list(to)).to_triples()) out.push_back(std::move(t));
  };
  return run_bfs(p, step, crossed);
}

BFSResult edge_bfs(const GraphBundle& g, const BFSParams& p) {
  require_schema(g.schema, Schema::Incidence, "edgeBFS");
  if (!g.transpose_table) throw Error(ErrorCode::SchemaMismatch, "edgeBFS needs the incidence transpose table");
  Assoc e = logical(g.main), et = logical(*g.transpose_table);
  std::vector<Key> touched;
  auto step = [&](const std::vector<Key>& frontier, std::vector<Key>& filtered, std::vector<Key>& nbrs) {
    filtered = admit(frontier, g.degree, p);
    if (filtered.empty()) return;
    Assoc x = matmul(frontier_row(filtered), et);
    touched = x.col_keys();
    nbrs = matmul(x, e).col_keys();
  };
  auto crossed = [&](const std::vector<Key>& from, const std::vector<Key>& to, std::vector<Triple>& out) {
    if (to.empty()) return;
    incidence_crossings(select(g.main, Selector::list(touched), Selector::all()),
                        std::set<Key>(from.begin(), from.end()), std::set<Key>(to.begin(), to.end()), out);
  };
  return run_bfs(p, step, crossed);
}

BFSResult single_table_bfs(const GraphBundle& g, const BFSParams& p) {
  require_schema(g.schema, Schema::SingleTable, "singleTableBFS");
  Assoc edges = logical(select(g.main, Selector::all(), Selector::prefix(std::string(kEdgeColumnPrefix))));
  auto step = [&](const std::vector<Key>& frontier, std::vector<Key>& filtered, std::vector<Key>& nbrs) {
    filtered = admit(frontier, g.main, p);
    if (filtered.empty()) return;
    Assoc r = matmul(frontier_row(filtered), edges);
    for (const auto& c : r.col_keys()) nbrs.push_back(strip_edge_column(c));
  };
  auto crossed = [&](const std::vector<Key>& from, const std::vector<Key>& to, std::vector<Triple>& out) {
    if (to.empty()) return;
    std::vector<Key> cols;
    for (const auto& v : to) cols.push_back(edge_column(v));
    for (auto& t : select(g.main, Selector::list(from), Selector::list(cols)).to_triples()) {
      out.push_back({t.row, strip_edge_column(t.col), t.val});
    }
  };
  return run_bfs(p, step, crossed);
}

BFSResult bfs(const GraphBundle& g, const BFSParams& p) {
  switch (g.schema) {
    case Schema::Adjacency:
      return adj_bfs(g, p);
    case Schema::Incidence:
      return edge_bfs(g, p);
    case Schema::SingleTable:
      return single_table_bfs(g, p);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown schema");
}

Assoc triangle_support(const Assoc& adjacency) {
  Assoc l = logical(adjacency);
  Assoc sq = matmul(l, l);
  return mask_by_pattern(sq, l);
}

Assoc mask_by_pattern(const Assoc& values, const Assoc& pattern) {
  // Map pattern columns onto value columns once, then probe row by row.
  const auto& pc = pattern.col_keys();
  const auto& vc = values.col_keys();
  std::vector<std::int64_t> colmap(pc.size(), -1);
  for (std::size_t i = 0, j = 0; i < pc.size() && j < vc.size();) {
    if (pc[i] < vc[j]) {
      ++i;
    } else if (vc[j] < pc[i]) {
      ++j;
    } else {
      colmap[i++] = static_cast<std::int64_t>(j++);
    }
  }
  std::vector<Triple> out;
  auto prp = pattern.row_ptr();
  auto vrp = values.row_ptr();
  auto vci = values.col_index();
  const auto& vr = values.row_keys();
  for (std::size_t r = 0; r < pattern.row_keys().size(); ++r) {
    const Key& row = pattern.row_keys()[r];
    auto it = std::lower_bound(vr.begin(), vr.end(), row);
    if (it == vr.end() || *it != row) continue;
    auto vrow = static_cast<std::size_t>(it - vr.begin());
    auto lo = vci.begin() + static_cast<std::ptrdiff_t>(vrp[vrow]);
    auto hi = vci.begin() + static_cast<std::ptrdiff_t>(vrp[vrow + 1]);
    for (auto p = prp[r]; p < prp[r + 1]; ++p) {
      auto c = colmap[pattern.col_index()[p]];
      if (c < 0) continue;
      auto q = std::lower_bound(lo, hi, static_cast<kernels::Index>(c));
      if (q == hi || *q != static_cast<kernels::Index>(c)) continue;
      out.push_back({row, pc[pattern.col_index()[p]], values.value(static_cast<std::size_t>(q - vci.begin()))});
    }
  }
  return Assoc::from_triples(out);
}

Assoc jaccard(const GraphBundle& g, MemoryTracker* tracker) {
  require_schema(g.schema, Schema::Adjacency, "jaccard");
  TrackedBytes charge(tracker);
  Assoc l = logical(g.main);
  charge.set(g.main.byte_size() + l.byte_size());
  Assoc sq = matmul(l, l);
  charge.set(g.main.byte_size() + l.byte_size() + sq.byte_size());
  std::vector<double> rdeg, cdeg;
  for (const auto& k : sq.row_keys()) rdeg.push_back(degree_at(g.degree, k, degree_key()));
  for (const auto& k : sq.col_keys()) cdeg.push_back(degree_at(g.degree, k, degree_key()));
  std::vector<Triple> out;
  auto rp = sq.row_ptr();
  auto num = sq.numbers();
  for (std::size_t r = 0; r < sq.row_keys().size(); ++r) {
    for (auto p = rp[r]; p < rp[r + 1]; ++p) {
      auto c = sq.col_index()[p];
      if (!(sq.row_keys()[r] < sq.col_keys()[c])) continue;
      out.push_back({sq.row_keys()[r], sq.col_keys()[c], jaccard_value(num[p], rdeg[r], cdeg[c])});
    }
  }
  return Assoc::from_triples(out);
}

GraphBundle ktruss_adj(const GraphBundle& g, const TrussParams& p, MemoryTracker* tracker) {
  require_schema(g.schema, Schema::Adjacency, "kTrussAdj");
  p.validate();
  if (p.k == 2) return g;
  TrackedBytes charge(tracker);
  Assoc cur = g.main;
  const double need = p.k - 2;
  for (;;) {
    Assoc l = logical(cur);
    charge.set(g.main.byte_size() + cur.byte_size() + l.byte_size());
    Assoc sq = matmul(l, l);
    charge.set(g.main.byte_size() + cur.byte_size() + l.byte_size() + sq.byte_size());
    Assoc support = mask_by_pattern(sq, l);
    std::vector<Triple> kept;
    for (const auto& t : cur.to_triples()) {
      auto s = support.at(t.row, t.col);
      if (s && s->number() >= need) kept.push_back(t);
    }
    if (kept.size() == cur.nnz()) break;
    cur = Assoc::from_triples(kept);
  }
  return adjacency_bundle(std::move(cur));
}

GraphBundle ktruss_edge(const GraphBundle& g, const TrussParams& p, MemoryTracker* tracker) {
  require_schema(g.schema, Schema::Incidence, "kTrussEdge");
  p.validate();
  if (p.k == 2) return g;
  TrackedBytes charge(tracker);
  charge.set(g.main.byte_size() + (g.transpose_table ? g.transpose_table->byte_size() : 0));
  auto truss = ktruss_adj(adjacency_bundle(canonical_adjacency(g)), p, tracker);
  return incidence_subset(g.main, truss.main);
}

namespace detail {

GraphBundle adjacency_bundle(Assoc main) {
  GraphBundle out;
  out.schema = Schema::Adjacency;
  out.degree = reduce_rows(logical(main));
  out.main = std::move(main);
  return out;
}

GraphBundle incidence_subset(const Assoc& incidence, const Assoc& keep_pairs) {
  std::vector<Triple> rows;
  auto rp = incidence.row_ptr();
  for (std::size_t r = 0; r < incidence.row_keys().size(); ++r) {
    if (rp[r + 1] - rp[r] != 2) continue;
    const Key& a = incidence.col_keys()[incidence.col_index()[rp[r]]];
    const Key& b = incidence.col_keys()[incidence.col_index()[rp[r] + 1]];
    if (!keep_pairs.at(a, b)) continue;
    for (auto q = rp[r]; q < rp[r + 1]; ++q) {
      rows.push_back({incidence.row_keys()[r], incidence.col_keys()[incidence.col_index()[q]], incidence.value(q)});
    }
  }
  GraphBundle out;
  out.schema = Schema::Incidence;
  out.main = Assoc::from_triples(rows);
  out.transpose_table = transpose(out.main);
  out.degree = reduce_rows(logical(keep_pairs));
  return out;
}

}  // namespace detail

}  // namespace d4m::algo
