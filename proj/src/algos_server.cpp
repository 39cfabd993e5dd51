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

#include <functional>
#include <memory>
#include <optional>
#include <set>

#include "algos_common.hpp"
#include "d4m/algos.hpp"
#include "d4m/error.hpp"

namespace d4m::algo {

using namespace detail;

namespace {

const Key& schema_row() {
  static const Key k("graph");
  return k;
}
const Key& schema_col() {
  static const Key k("schema");
  return k;
}

std::string schema_table(const std::string& name) { return name + "Schema"; }

/// Scratch table dropped when the scope ends.
class Scratch {
 public:
  Scratch(kv::Store& st, const std::string& tag, kv::Combiner c = kv::Combiner::LastWriteWins)
      : st_(st), name_(st.temp_name(tag)) {
    h_.emplace(st.bind(name_, c));
  }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;
  ~Scratch() {
    h_.reset();
    try {
      st_.delete_table(name_);
    } catch (...) {
    }
  }
  kv::TableHandle& operator*() { return *h_; }
  kv::TableHandle* operator->() { return &*h_; }

 private:
  kv::Store& st_;
  std::string name_;
  std::optional<kv::TableHandle> h_;
};

kv::TableHandle bind_existing(kv::Store& st, const std::string& name) {
  if (!st.has_table(name)) throw Error(ErrorCode::MissingTable, "no table " + name);
  return st.bind(name);
}

std::vector<Key> distinct_rows(const kv::TableHandle& t, const kv::IteratorSpec& spec = {}) {
  std::vector<Key> out;
  auto sc = t.open_scanner(spec);
  Triple tr;
  while (sc.next(tr)) {
    if (out.empty() || out.back() != tr.row) out.push_back(tr.row);
  }
  return out;
}

std::vector<Key> distinct_cols(const kv::TableHandle& t) {
  std::set<Key> cols;
  auto sc = t.open_scanner();
  Triple tr;
  while (sc.next(tr)) cols.insert(tr.col);
  return {cols.begin(), cols.end()};
}

void write_frontier(kv::TableHandle& ft, const std::vector<Key>& vs) {
  std::vector<Triple> t;
  t.reserve(vs.size());
  for (const auto& v : vs) t.push_back({v, frontier_key(), 1});
  ft.put(t);
  ft.flush();
}

kv::IteratorSpec degree_band(const BFSParams& p, const std::string& table) {
  kv::IteratorSpec s;
  s.then(kv::DegreeFilter{p.min_degree, p.max_degree, table, p.degree_column});
  return s;
}

/// Charges a materialized result to the store's tracker for the rest of the call.
struct ResultCharge {
  TrackedBytes bytes;
  explicit ResultCharge(kv::Store& st) : bytes(st.options().tracker) {}
  void add(std::size_t n) { bytes.set(total += n); }
  std::size_t total = 0;
};

}  // namespace

StoredGraph store_graph(kv::Store& store, const std::string& name, const GraphBundle& g) {
  StoredGraph sg;
  sg.schema = g.schema;
  sg.name = name;
  sg.main = name;
  if (g.schema == Schema::Incidence) sg.transpose = name + "T";
  if (g.schema != Schema::SingleTable) sg.degree = name + "Deg";
  for (const auto& t : {name, name + "T", name + "Deg", schema_table(name)}) {
    if (store.has_table(t)) store.delete_table(t);
  }
  auto put = [&](const std::string& t, const Assoc& a) {
    auto h = store.bind(t);
    kv::put_assoc(h, a);
    h.flush();
  };
  put(sg.main, g.main);
  if (!sg.transpose.empty()) put(sg.transpose, g.transpose_table ? *g.transpose_table : transpose(g.main));
  if (!sg.degree.empty()) put(sg.degree, g.degree);
  auto h = store.bind(schema_table(name));
  h.put({schema_row(), schema_col(), Value(std::string(to_string(g.schema)))});
  h.flush();
  return sg;
}

StoredGraph open_graph(kv::Store& store, const std::string& name) {
  auto tag = bind_existing(store, schema_table(name)).get(schema_row(), schema_col());
  if (!tag || !tag->is_text()) throw Error(ErrorCode::MissingTable, "no stored graph named " + name);
  StoredGraph sg;
  sg.schema = parse_schema(tag->text());
  sg.name = name;
  sg.main = name;
  if (sg.schema == Schema::Incidence) sg.transpose = name + "T";
  if (sg.schema != Schema::SingleTable) sg.degree = name + "Deg";
  return sg;
}

GraphBundle load_graph(kv::Store& store, const StoredGraph& sg) {
  GraphBundle g;
  g.schema = sg.schema;
  g.main = bind_existing(store, sg.main).to_assoc();
  if (!sg.transpose.empty()) g.transpose_table = bind_existing(store, sg.transpose).to_assoc();
  if (!sg.degree.empty()) g.degree = bind_existing(store, sg.degree).to_assoc();
  return g;
}

BFSResult adj_bfs(kv::Store& store, const StoredGraph& g, const BFSParams& p) {
  require_schema(g.schema, Schema::Adjacency, "adjBFS");
  auto a = bind_existing(store, g.main);
  bind_existing(store, g.degree);
  auto step = [&](const std::vector<Key>& frontier, std::vector<Key>& filtered, std::vector<Key>& nbrs) {
    Scratch ft(store, "Ft");
    write_frontier(*ft, frontier);
    auto band = degree_band(p, g.degree);
    filtered = distinct_rows(*ft, band);
    if (filtered.empty()) return;
    Scratch r(store, "R", kv::Combiner::Sum);
    kv::TableMultOptions o;
    o.a_filter = band;
    o.logical = true;
    kv::table_mult_transposed(*ft, a, *r, MultiplyMode::Arith, o);
    nbrs = distinct_cols(*r);
  };
  auto crossed = [&](const std::vector<Key>& from, const std::vector<Key>& to, std::vector<Triple>& out) {
    if (to.empty()) return;
    kv::IteratorSpec s;
    s.then(kv::RangeFilter{Selector::list(from), Selector::list(to)});
    for (auto& t : a.scan(s)) out.push_back(std::move(t));
  };
  return run_bfs(p, step, crossed);
}

BFSResult edge_bfs(kv::Store& store, const StoredGraph& g, const BFSParams& p) {
  require_schema(g.schema, Schema::Incidence, "edgeBFS");
  auto e = bind_existing(store, g.main);
  auto et = bind_existing(store, g.transpose);
  bind_existing(store, g.degree);
  std::vector<Key> touched;
  auto step = [&](const std::vector<Key>& frontier, std::vector<Key>& filtered, std::vector<Key>& nbrs) {
    Scratch ft(store, "Ft");
    write_frontier(*ft, frontier);
    auto band = degree_band(p, g.degree);
    filtered = distinct_rows(*ft, band);
    if (filtered.empty()) return;
    Scratch x(store, "X", kv::Combiner::Sum);
    kv::TableMultOptions o;
    o.a_filter = band;
    o.logical = true;
    o.transpose_output = true;
    kv::table_mult_transposed(*ft, et, *x, MultiplyMode::Arith, o);
    touched = distinct_rows(*x);
    Scratch y(store, "Y", kv::Combiner::Sum);
    kv::TableMultOptions o2;
    o2.logical = true;
    kv::table_mult_transposed(*x, e, *y, MultiplyMode::Arith, o2);
    nbrs = distinct_cols(*y);
  };
  auto crossed = [&](const std::vector<Key>& from, const std::vector<Key>& to, std::vector<Triple>& out) {
    if (to.empty() || touched.empty()) return;
    kv::IteratorSpec s;
    s.then(kv::RangeFilter{Selector::list(touched), Selector::all()});
    auto rows = e.scan(s);
    incidence_crossings(Assoc::from_triples(rows), std::set<Key>(from.begin(), from.end()),
                        std::set<Key>(to.begin(), to.end()), out);
  };
  return run_bfs(p, step, crossed);
}

BFSResult single_table_bfs(kv::Store& store, const StoredGraph& g, const BFSParams& p) {
  require_schema(g.schema, Schema::SingleTable, "singleTableBFS");
  auto s = bind_existing(store, g.main);
  auto step = [&](const std::vector<Key>& frontier, std::vector<Key>& filtered, std::vector<Key>& nbrs) {
    Scratch ft(store, "Ft");
    write_frontier(*ft, frontier);
    auto band = degree_band(p, g.main);
    filtered = distinct_rows(*ft, band);
    if (filtered.empty()) return;
    Scratch r(store, "R", kv::Combiner::Sum);
    kv::TableMultOptions o;
    o.a_filter = band;
    o.b_filter.then(kv::RangeFilter{Selector::all(), Selector::prefix(std::string(kEdgeColumnPrefix))});
    o.logical = true;
    kv::table_mult_transposed(*ft, s, *r, MultiplyMode::Arith, o);
    for (const auto& c : distinct_cols(*r)) nbrs.push_back(strip_edge_column(c));
  };
  auto crossed = [&](const std::vector<Key>& from, const std::vector<Key>& to, std::vector<Triple>& out) {
    if (to.empty()) return;
    std::vector<Key> cols;
    for (const auto& v : to) cols.push_back(edge_column(v));
    kv::IteratorSpec spec;
    spec.then(kv::RangeFilter{Selector::list(from), Selector::list(cols)});
    for (auto& t : s.scan(spec)) out.push_back({t.row, strip_edge_column(t.col), t.val});
  };
  return run_bfs(p, step, crossed);
}

BFSResult bfs(kv::Store& store, const StoredGraph& g, const BFSParams& p) {
  switch (g.schema) {
    case Schema::Adjacency:
      return adj_bfs(store, g, p);
    case Schema::Incidence:
      return edge_bfs(store, g, p);
    case Schema::SingleTable:
      return single_table_bfs(store, g, p);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown schema");
}

Assoc jaccard(kv::Store& store, const StoredGraph& g) {
  require_schema(g.schema, Schema::Adjacency, "jaccard");
  auto a = bind_existing(store, g.main);
  auto deg = bind_existing(store, g.degree).point_reader();
  Scratch inter(store, "J", kv::Combiner::Sum);
  kv::IteratorSpec job;
  job.then(kv::MultiplyJoin{g.main, MultiplyMode::Arith, inter->name(), false, true, true});
  store.run_job(a, job);
  auto degree_of = [&](const Key& v) {
    auto d = deg.get(v, degree_key());
    return d && d->is_number() ? d->number() : 0.0;
  };
  std::vector<Triple> out;
  ResultCharge charge(store);
  auto sc = inter->open_scanner();
  Triple t;
  std::optional<Key> row;
  double du = 0;
  while (sc.next(t)) {
    if (!row || *row != t.row) {
      row = t.row;
      du = degree_of(t.row);
    }
    double i = t.val.number();
    out.push_back({t.row, t.col, jaccard_value(i, du, degree_of(t.col))});
    charge.add(sizeof(Triple));
  }
  return Assoc::from_triples(out);
}

namespace {

/// Repeats support counting and thresholding inside the store, starting
/// from `source`, and hands the fixpoint table to `use`.
void truss_in_store(kv::Store& store, const std::string& source, int k,
                    const std::function<void(kv::TableHandle&)>& use) {
  std::unique_ptr<Scratch> cur;
  std::string cur_name = source;
  for (;;) {
    auto next = std::make_unique<Scratch>(store, "K");
    {
      auto c = store.bind(cur_name);
      Scratch support(store, "S", kv::Combiner::Sum);
      kv::IteratorSpec job;
      job.then(kv::MultiplyJoin{cur_name, MultiplyMode::Arith, support->name(), true, true, false});
      store.run_job(c, job);
      auto rep = kv::threshold_join(c, *support, k - 2, **next);
      if (rep.entries_written == rep.entries_read) break;
    }
    cur = std::move(next);
    cur_name = (*cur)->name();
  }
  auto h = store.bind(cur_name);
  use(h);
}

/// Edge rows of a stored incidence table whose endpoint pair is in keep.
std::vector<Triple> surviving_edges(const kv::TableHandle& e, const Assoc& keep) {
  std::vector<Triple> out, row;
  auto flush_row = [&] {
    if (row.size() == 2 && keep.at(row[0].col, row[1].col)) out.insert(out.end(), row.begin(), row.end());
    row.clear();
  };
  auto sc = e.open_scanner();
  Triple t;
  while (sc.next(t)) {
    if (!row.empty() && row.front().row != t.row) flush_row();
    row.push_back(std::move(t));
  }
  flush_row();
  return out;
}

}  // namespace

GraphBundle ktruss_adj(kv::Store& store, const StoredGraph& g, const TrussParams& p) {
  require_schema(g.schema, Schema::Adjacency, "kTrussAdj");
  p.validate();
  if (p.k == 2) return load_graph(store, g);
  bind_existing(store, g.main);
  GraphBundle out;
  ResultCharge charge(store);
  truss_in_store(store, g.main, p.k, [&](kv::TableHandle& survivors) {
    out = adjacency_bundle(survivors.to_assoc());
    charge.add(out.main.byte_size() + out.degree.byte_size());
  });
  return out;
}

GraphBundle ktruss_edge(kv::Store& store, const StoredGraph& g, const TrussParams& p) {
  require_schema(g.schema, Schema::Incidence, "kTrussEdge");
  p.validate();
  if (p.k == 2) return load_graph(store, g);
  auto e = bind_existing(store, g.main);
  Scratch adj(store, "A", kv::Combiner::Sum);
  kv::TableMultOptions o;
  o.logical = true;
  o.upper_triangle_only = true;
  kv::table_mult_transposed(e, e, *adj, MultiplyMode::Arith, o);
  o.transpose_output = true;
  kv::table_mult_transposed(e, e, *adj, MultiplyMode::Arith, o);
  GraphBundle out;
  ResultCharge charge(store);
  truss_in_store(store, adj->name(), p.k, [&](kv::TableHandle& survivors) {
    auto keep = survivors.to_assoc();
    charge.add(keep.byte_size());
    out.schema = Schema::Incidence;
    out.main = Assoc::from_triples(surviving_edges(e, keep));
    out.transpose_table = transpose(out.main);
    out.degree = reduce_rows(logical(keep));
    charge.add(out.main.byte_size() * 2 + out.degree.byte_size());
  });
  return out;
}

}  // namespace d4m::algo
