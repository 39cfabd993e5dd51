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

// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number, e.g. `d4m_acceptance 1 4 7`.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "algo_oracles.hpp"
#include "d4m/algos.hpp"
#include "d4m/assoc.hpp"
#include "d4m/bench.hpp"
#include "d4m/error.hpp"
#include "d4m/gen.hpp"
#include "d4m/graph.hpp"
#include "d4m/kv/fault.hpp"
#include "d4m/kv/store.hpp"
#include "d4m/selector.hpp"
#include "d4m/triple_io.hpp"
#include "test_support.hpp"

#ifndef D4M_TEST_DATA_DIR
#error "D4M_TEST_DATA_DIR must point at tests/data"
#endif

namespace fs = std::filesystem;
using namespace d4m;
using testutil::TempDir;

namespace {

/// Collects the first few mismatches; a criterion passes when none occur.
struct Check {
  std::size_t failures = 0;
  std::ostringstream notes;
  std::string summary;

  bool expect(bool ok, const std::string& what) {
    if (!ok && failures++ < 3) notes << (failures > 1 ? "; " : "") << what;
    return ok;
  }
};

kv::StoreOptions fast() {
  kv::StoreOptions o;
  o.sync = false;
  return o;
}

EdgeList generated(int scale, std::uint64_t seed) { return oracle::generated(scale, seed); }

// ---- 1: generator sizes ----

void generator_counts(Check& c) {
  for (auto [s, d] : {std::pair{10, 16}, std::pair{12, 16}}) {
    gen::GenConfig cfg;
    cfg.scale = s;
    cfg.edges_per_vertex = d;
    cfg.seed = 1;
    auto e = gen::generate(cfg);
    auto pairs = gen::kronecker_pairs(cfg);
    std::size_t want = static_cast<std::size_t>(d) << s;
    c.expect(e.edges.size() == want, "scale " + std::to_string(s) + ": " + std::to_string(e.edges.size()) +
                                         " tuples, want " + std::to_string(want));
    c.expect(pairs.size() == want, "pair count at scale " + std::to_string(s));
    std::set<std::uint64_t> ids;
    for (auto [u, v] : pairs) {
      ids.insert(u);
      ids.insert(v);
    }
    std::set<Key> keys;
    for (const auto& ed : e.edges) {
      keys.insert(ed.u);
      keys.insert(ed.v);
    }
    std::uint64_t n = std::uint64_t{1} << s;
    c.expect(ids.size() <= n && (ids.empty() || *ids.rbegin() < n), "vertex ids exceed 2^" + std::to_string(s));
    c.expect(keys.size() == ids.size(), "vertex keys and ids disagree");
    c.summary += "s=" + std::to_string(s) + ": " + std::to_string(e.edges.size()) + " tuples/" +
                 std::to_string(ids.size()) + " vertices  ";
  }
}

// ---- 2: indexing corpus ----

void indexing_corpus(Check& c) {
  auto fixture = Assoc::from_triples(read_triples_file(fs::path(D4M_TEST_DATA_DIR) / "indexing_fixture.tsv"));
  std::map<std::string, std::set<std::tuple<std::string, std::string, double>>> golden;
  std::ifstream in(fs::path(D4M_TEST_DATA_DIR) / "indexing_golden.tsv");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string label, row, col, val;
    std::getline(ls, label, '\t');
    std::getline(ls, row, '\t');
    std::getline(ls, col, '\t');
    std::getline(ls, val, '\t');
    golden[label].emplace(row, col, std::stod(val));
  }
  std::vector<std::pair<std::string, Assoc>> got = {
      {"alice row", select(fixture, parse_selector("alice "), parse_selector(":"))},
      {"alice and bob rows", select(fixture, parse_selector("alice bob "), parse_selector(":"))},
      {"rows beginning with al", select(fixture, parse_selector("al* "), parse_selector(":"))},
      {"rows alice to bob", select(fixture, parse_selector("alice : bob "), parse_selector(":"))},
      {"first two rows", select(fixture, parse_positional("1:2"), parse_selector(":"))},
      {"values equal to 47", equals_value(fixture, Value(47.0))},
  };
  c.expect(golden.size() == got.size(), "golden file has " + std::to_string(golden.size()) + " forms");
  for (const auto& [label, a] : got) {
    std::set<std::tuple<std::string, std::string, double>> s;
    for (const auto& t : a.to_triples()) s.emplace(t.row.text(), t.col.text(), t.val.number());
    c.expect(s == golden[label], "'" + label + "' differs from golden");
  }
  c.summary = std::to_string(got.size()) + " selector forms";
}

// ---- 3: one BFS step as a vector-matrix product ----

void bfs_step_duality(Check& c) {
  std::size_t vertices = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto e = generated(8, seed);
    auto a = build_adjacency(e).main;
    std::map<Key, std::set<Key>> nbr;
    for (const auto& ed : e.edges) {
      nbr[ed.u].insert(ed.v);
      nbr[ed.v].insert(ed.u);
    }
    for (const auto& [v, want] : nbr) {
      std::vector<Triple> one{{Key("x"), v, 1}};
      auto step = matmul(Assoc::from_triples(one), a).col_keys();
      c.expect(std::set<Key>(step.begin(), step.end()) == want, "seed " + std::to_string(seed) + " vertex " +
                                                                    v.render());
      ++vertices;
    }
  }
  c.summary = std::to_string(vertices) + " vertices over 10 graphs";
}

// ---- 4: in-store multiply equals in-memory multiply ----

void table_mult_equivalence(Check& c) {
  TempDir d("acc4");
  auto store = kv::Store::open(d.path, fast());
  std::size_t cells = 0;
  for (int s = 4; s <= 10; ++s) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto a = build_adjacency(generated(s, seed)).main;
      auto name = "a" + std::to_string(s) + "_" + std::to_string(seed);
      auto t = store.bind(name);
      kv::put_assoc(t, a);
      t.flush();
      auto sink = store.bind(name + "_sq", kv::Combiner::Sum);
      kv::table_mult(t, t, sink);
      auto want = matmul(a, a);
      c.expect(sink.to_assoc() == want, "scale " + std::to_string(s) + " seed " + std::to_string(seed));
      cells += want.nnz();
      store.delete_table(name + "_sq");
      store.delete_table(name);
    }
  }
  c.summary = "21 products, " + std::to_string(cells) + " result entries";
}

// ---- 5: algorithm oracles ----

std::vector<EdgeList> oracle_corpus() {
  std::vector<EdgeList> corpus;
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) corpus.push_back(oracle::random_graph(rng, 64));
  for (int s = 2; s <= 8; ++s) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) corpus.push_back(generated(s, seed));
  }
  return corpus;
}

void algorithm_oracles(Check& c) {
  auto corpus = oracle_corpus();
  TempDir d("acc5");
  auto store = kv::Store::open(d.path, fast());
  const Schema schemas[] = {Schema::Adjacency, Schema::Incidence, Schema::SingleTable};
  std::size_t bfs_runs = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& e = corpus[i];
    auto tag = "graph " + std::to_string(i);
    oracle::Graph og(e);
    auto adj = build_adjacency(e);
    auto sa = algo::store_graph(store, "adj", adj);

    for (int k = 2; k <= 4; ++k) {
      auto want = oracle::truss(og, k);
      auto local = algo::ktruss_adj(adj, {k});
      c.expect(oracle::upper_edges(local.main) == want, tag + " truss k=" + std::to_string(k));
      c.expect(algo::ktruss_adj(store, sa, {k}).main == local.main, tag + " server truss k=" + std::to_string(k));
    }

    auto jw = oracle::jaccard(og);
    std::size_t upper = 0;
    for (const auto& [uv, j] : jw) upper += uv.first < uv.second ? 1 : 0;
    for (const auto& got : {algo::jaccard(adj), algo::jaccard(store, sa)}) {
      bool ok = got.nnz() == upper;
      for (const auto& t : got.to_triples()) {
        auto it = jw.find({t.row, t.col});
        ok = ok && t.row < t.col && it != jw.end() &&
             std::abs(t.val.number() - it->second) <= 1e-12 * std::abs(it->second);
      }
      c.expect(ok, tag + " jaccard");
    }

    auto starts = bench::pick_starts(e, 1000 + i, 5);
    for (auto s : schemas) {
      auto g = build(e, s);
      auto sg = algo::store_graph(store, "g" + std::string(to_string(s)), g);
      for (int hops = 1; hops <= 3; ++hops) {
        algo::BFSParams p;
        p.starts = starts;
        p.hops = hops;
        p.min_degree = 1;
        p.max_degree = 100;
        auto want = oracle::bfs(og, p);
        auto local = algo::bfs(g, p);
        auto server = algo::bfs(store, sg, p);
        auto where = tag + " bfs " + std::string(to_string(s)) + " hops " + std::to_string(hops);
        c.expect(local.reached == want.reached && local.traversed_edges == want.traversed_edges, where + " local");
        c.expect(server.reached == want.reached && server.traversed_edges == want.traversed_edges,
                 where + " server");
        bfs_runs += 2;
      }
    }
  }
  c.summary = std::to_string(corpus.size()) + " graphs, k in {2,3,4}, " + std::to_string(bfs_runs) + " BFS runs";
}

// ---- 6: schema cross-equivalence ----

void schema_equivalence(Check& c) {
  const Schema all[] = {Schema::Adjacency, Schema::Incidence, Schema::SingleTable};
  std::size_t graphs = 0;
  for (int s = 2; s <= 8; ++s) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto e = generated(s, seed);
      auto adj = build_adjacency(e);
      auto tag = "scale " + std::to_string(s) + " seed " + std::to_string(seed);
      for (auto from : all) {
        auto src = build(e, from);
        for (auto to : all) {
          if (from == to) continue;
          c.expect(canonical_adjacency(convert(src, to)) == adj.main,
                   tag + " " + std::string(to_string(from)) + "->" + std::string(to_string(to)));
        }
      }
      // Gram matrix of the unit incidence: off-diagonal adjacency, degree on the diagonal.
      Assoc le = logical(build_incidence(e).main);
      std::vector<Triple> want = logical(adj.main).to_triples();
      for (const auto& [v, ns] : oracle::Graph(e).nbr) want.push_back({v, v, static_cast<double>(ns.size())});
      c.expect(matmul(transpose(le), le) == Assoc::from_triples(want), tag + " E'E != A + D");
      ++graphs;
    }
  }
  c.summary = std::to_string(graphs) + " graphs, 6 directions each";
}

// ---- 7: memory shape ----

void memory_shape(Check& c) {
  auto g = build_adjacency(generated(12, 1));
  MemoryTracker local;
  auto want = algo::ktruss_adj(g, {3}, &local);
  std::size_t budget = local.peak() / 4;
  c.expect(budget > 0, "local tracked nothing");

  MemoryTracker server(budget);
  TempDir d("acc7");
  auto opts = fast();
  opts.tracker = &server;
  auto store = kv::Store::open(d.path, opts);
  auto sg = algo::store_graph(store, "g", g);
  server.reset_peak();
  try {
    auto got = algo::ktruss_adj(store, sg, {3});
    c.expect(got.main == want.main, "server truss differs from local");
  } catch (const Error& e) {
    c.expect(false, std::string("server run over budget: ") + e.what());
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "local peak %.1f MB, budget %.1f MB, server peak %.1f MB (%.2fx)",
                static_cast<double>(local.peak()) / 1e6, static_cast<double>(budget) / 1e6,
                static_cast<double>(server.peak()) / 1e6,
                static_cast<double>(local.peak()) / static_cast<double>(std::max<std::size_t>(server.peak(), 1)));
  c.summary = buf;
}

// ---- 8: crash durability ----

using Snapshot = std::vector<Triple>;
constexpr int kFlushes = 5;

void workload(const fs::path& dir, int fd) {
  auto s = kv::Store::open(dir);
  auto t = s.bind("t");
  for (int i = 0; i < kFlushes; ++i) {
    for (int j = 0; j < 400; ++j) t.put({Key("r" + std::to_string(j)), Key("c" + std::to_string(i)), Value(i + 1)});
    if (i > 0) t.erase(Key("r0"), Key("c" + std::to_string(i - 1)));
    if (fd >= 0) (void)!::write(fd, "b", 1);
    t.flush();
    if (fd >= 0) (void)!::write(fd, "d", 1);
  }
}

Snapshot after_flushes(int n) {
  std::map<std::pair<Key, Key>, Value> m;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 400; ++j) m[{Key("r" + std::to_string(j)), Key("c" + std::to_string(i))}] = Value(i + 1);
    if (i > 0) m.erase({Key("r0"), Key("c" + std::to_string(i - 1))});
  }
  Snapshot out;
  for (auto& [k, v] : m) out.push_back({k.first, k.second, v});
  return out;
}

void crash_durability(Check& c) {
  std::uint64_t total = 0;
  {
    TempDir d("acc8");
    auto before = kv::fault::io_ops();
    workload(d.path, -1);
    total = kv::fault::io_ops() - before;
  }
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::uint64_t> point(0, total - 1);
  int landed = 0;
  for (int trial = 0; trial < 50; ++trial) {
    TempDir d("acc8");
    auto at = point(rng);
    int pfd[2];
    if (::pipe(pfd) != 0) throw Error(ErrorCode::IoFailure, "pipe");
    pid_t pid = ::fork();
    if (pid == 0) {
      ::close(pfd[0]);
      kv::fault::crash_after(at);
      workload(d.path, pfd[1]);
      ::_exit(0);
    }
    ::close(pfd[1]);
    std::string log;
    char buf[64];
    for (ssize_t n; (n = ::read(pfd[0], buf, sizeof buf)) > 0;) log.append(buf, static_cast<std::size_t>(n));
    ::close(pfd[0]);
    int status = 0;
    ::waitpid(pid, &status, 0);
    auto tag = "kill point " + std::to_string(at);
    c.expect(WIFEXITED(status) && WEXITSTATUS(status) == kv::fault::kCrashExitCode, tag + " did not crash");
    int done = static_cast<int>(std::count(log.begin(), log.end(), 'd'));
    int begun = static_cast<int>(std::count(log.begin(), log.end(), 'b'));
    try {
      auto s = kv::Store::open(d.path);
      Snapshot got = s.has_table("t") ? s.bind("t").scan() : Snapshot{};
      // A flush whose manifest rename landed before the kill is complete.
      bool ok = got == after_flushes(done) || (begun == done + 1 && got == after_flushes(begun));
      if (ok && got != after_flushes(done)) ++landed;
      c.expect(ok, tag + ": state matches no flush boundary");
      for (const auto& p : fs::directory_iterator(d.path)) {
        c.expect(p.path().extension() != ".tmp", tag + ": stray temp file after reopen");
      }
    } catch (const Error& e) {
      c.expect(false, tag + ": " + e.what());
    }
  }
  c.summary = "50 kill points over " + std::to_string(total) + " I/O ops, " + std::to_string(landed) +
              " in-flight flushes had landed";
}

// ---- 9: benchmark reproducibility ----

void bench_reproducibility(Check& c) {
  bench::Matrix m;
  m.include_query_time = true;
  using CellKey = std::tuple<std::string, std::string, std::string, int, std::uint64_t, bool>;
  auto run_once = [&] {
    std::map<CellKey, bench::Record> out;
    bench::run(m, [&](const bench::Record& r) {
      out[{std::string(bench::to_string(r.algorithm)), std::string(to_string(r.schema)),
           std::string(algo::to_string(r.mode)), r.scale, r.seed, r.includes_query_time}] = r;
    });
    return out;
  };
  auto first = run_once();
  auto second = run_once();
  c.expect(first.size() == second.size() && !first.empty(), "record counts differ");
  std::size_t bfs_pairs = 0;
  for (const auto& [k, r] : first) {
    auto name = std::get<0>(k) + "/" + std::get<1>(k) + "/" + std::get<2>(k) + " s" + std::to_string(r.scale) +
                " seed " + std::to_string(r.seed);
    c.expect(r.ok(), name + " " + r.status);
    auto it = second.find(k);
    c.expect(it != second.end() && it->second.ok() && it->second.entries == r.entries, name + " entries differ");
    if (std::get<2>(k) == "local") {
      auto server = first.find({std::get<0>(k), std::get<1>(k), "server", r.scale, r.seed, false});
      c.expect(server != first.end() && server->second.entries == r.entries, name + " local/server differ");
    }
    if (std::get<0>(k) == "bfs" && std::get<2>(k) == "local" && !r.includes_query_time) {
      for (const auto* run : {&first, &second}) {
        auto with = run->find({"bfs", std::get<1>(k), "local", r.scale, r.seed, true});
        auto without = run->find(k);
        c.expect(with != run->end() && with->second.wall_seconds > without->second.wall_seconds,
                 name + " query time did not increase wall time");
      }
      ++bfs_pairs;
    }
  }
  c.summary = std::to_string(first.size()) + " records per run, " + std::to_string(bfs_pairs) +
              " Local BFS with/without pairs";
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  void (*fn)(Check&);
};

const Criterion kCriteria[] = {
    {1, "generator emits d*2^s tuples over <= 2^s vertices", 5, generator_counts},
    {2, "indexing selector corpus matches golden results", 1, indexing_corpus},
    {3, "matmul BFS step equals neighbour enumeration", 10, bfs_step_duality},
    {4, "in-store tableMult equals in-memory matmul", 120, table_mult_equivalence},
    {5, "truss, jaccard and BFS match brute-force oracles", 300, algorithm_oracles},
    {6, "schema conversions agree; E'E = A + D", 60, schema_equivalence},
    {7, "server k-truss fits a quarter of the local working set", 600, memory_shape},
    {8, "kill-during-flush leaves the last completed flush", 120, crash_durability},
    {9, "benchmark matrix is reproducible; query time adds", 1800, bench_reproducibility},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& cr : kCriteria) {
    if (!only.empty() && !only.count(cr.id)) continue;
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
      cr.fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < cr.limit_seconds, "took longer than " + std::to_string(static_cast<int>(cr.limit_seconds)) + " s");
    bool pass = c.failures == 0;
    failed += pass ? 0 : 1;
    std::printf("[%s] %d. %s (%.1f s) %s%s\n", pass ? "PASS" : "FAIL", cr.id, cr.name, secs, c.summary.c_str(),
                pass ? "" : (" -- " + std::to_string(c.failures) + " failure(s): " + c.notes.str()).c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
