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

#include "d4m/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "d4m/error.hpp"
#include "d4m/gen.hpp"

namespace d4m::bench {

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::BFS:
      return "bfs";
    case Algorithm::Jaccard:
      return "jaccard";
    case Algorithm::KTruss:
      return "ktruss";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "bfs") return Algorithm::BFS;
  if (name == "jaccard") return Algorithm::Jaccard;
  if (name == "ktruss") return Algorithm::KTruss;
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + std::string(name) + "'");
}

bool valid_cell(Algorithm a, Schema s) noexcept {
  switch (a) {
    case Algorithm::BFS:
      return true;
    case Algorithm::Jaccard:
      return s == Schema::Adjacency;
    case Algorithm::KTruss:
      return s != Schema::SingleTable;
  }
  return false;
}

namespace {

constexpr std::string_view kVersionLine = "# d4m bench results v1";
constexpr std::string_view kColumns =
    "algorithm,schema,mode,scale,degree,seed,wall_seconds,entries,includes_query_time,status";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    auto p = s.find(sep);
    out.push_back(s.substr(0, p));
    if (p == std::string_view::npos) return out;
    s.remove_prefix(p + 1);
  }
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  std::istringstream is{std::string(s)};
  is >> out;
  return is && is.peek() == std::char_traits<char>::eof();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string csv_header() { return std::string(kVersionLine) + "\n" + std::string(kColumns) + "\n"; }

std::string to_csv(const Record& r) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.9g", r.wall_seconds);
  std::ostringstream os;
  os << to_string(r.algorithm) << ',' << to_string(r.schema) << ',' << algo::to_string(r.mode) << ',' << r.scale
     << ',' << r.degree << ',' << r.seed << ',' << wall << ',' << r.entries << ',' << (r.includes_query_time ? 1 : 0)
     << ',' << r.status;
  return os.str();
}

std::optional<Record> parse_csv(std::string_view line) {
  if (line.empty() || line.front() == '#' || line == kColumns) return std::nullopt;
  auto f = split(line, ',');
  if (f.size() != 10) return std::nullopt;
  try {
    Record r;
    r.algorithm = parse_algorithm(f[0]);
    r.schema = parse_schema(f[1]);
    r.mode = algo::parse_mode(f[2]);
    int q = 0;
    if (!parse_number(f[3], r.scale) || !parse_number(f[4], r.degree) || !parse_number(f[5], r.seed) ||
        !parse_number(f[6], r.wall_seconds) || !parse_number(f[7], r.entries) || !parse_number(f[8], q)) {
      return std::nullopt;
    }
    r.includes_query_time = q != 0;
    r.status = std::string(f[9]);
    return r;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<Record> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::vector<Record> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto r = parse_csv(line)) out.push_back(std::move(*r));
  }
  return out;
}

std::string gnuplot_header() {
  return "# algorithm schema mode scale degree seed includes_query_time wall_seconds entries\n";
}

std::string to_gnuplot(const Record& r) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.9g", r.wall_seconds);
  std::ostringstream os;
  os << to_string(r.algorithm) << ' ' << to_string(r.schema) << ' ' << algo::to_string(r.mode) << ' ' << r.scale
     << ' ' << r.degree << ' ' << r.seed << ' ' << (r.includes_query_time ? 1 : 0) << ' ' << wall << ' '
     << r.entries;
  return os.str();
}

std::vector<Key> pick_starts(const EdgeList& e, std::uint64_t seed, std::size_t n) {
  std::set<Key> vs;
  for (const auto& ed : e.edges) {
    vs.insert(ed.u);
    vs.insert(ed.v);
  }
  std::vector<Key> all(vs.begin(), vs.end());
  std::vector<Key> out;
  gen::CounterStream s(seed ^ 0x5eed5eed5eed5eedULL);
  n = std::min(n, all.size());
  for (std::uint64_t i = 0; out.size() < n; ++i) {
    const Key& k = all[s.bits(i) % all.size()];
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

std::vector<std::pair<Algorithm, Schema>> expand_cells(const Matrix& m) {
  std::vector<std::pair<Algorithm, Schema>> out;
  for (auto a : m.algorithms) {
    bool any = false;
    for (auto s : m.schemas) {
      if (valid_cell(a, s)) {
        out.emplace_back(a, s);
        any = true;
      }
    }
    if (!any) {
      throw Error(ErrorCode::InvalidCell, std::string(to_string(a)) + " has no valid schema among those requested");
    }
  }
  return out;
}

namespace {

algo::BFSParams bfs_params(const std::vector<Key>& starts, const AlgoParams& p) {
  algo::BFSParams b;
  b.starts = starts;
  b.hops = p.hops;
  b.min_degree = p.min_degree;
  b.max_degree = p.max_degree;
  return b;
}

Outcome pack(const Assoc& a, bool keep) {
  Outcome o;
  o.entries = a.nnz();
  if (keep) o.triples = a.to_triples();
  return o;
}

}  // namespace

Outcome run_local(Algorithm a, const GraphBundle& g, const std::vector<Key>& starts, const AlgoParams& p,
                  bool keep_triples) {
  switch (a) {
    case Algorithm::BFS:
      return pack(algo::bfs(g, bfs_params(starts, p)).reached, keep_triples);
    case Algorithm::Jaccard:
      return pack(algo::jaccard(g), keep_triples);
    case Algorithm::KTruss:
      if (g.schema == Schema::Incidence) return pack(algo::ktruss_edge(g, {p.k}).main, keep_triples);
      return pack(algo::ktruss_adj(g, {p.k}).main, keep_triples);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm");
}

Outcome run_server(Algorithm a, kv::Store& store, const algo::StoredGraph& g, const std::vector<Key>& starts,
                   const AlgoParams& p, bool keep_triples) {
  switch (a) {
    case Algorithm::BFS:
      return pack(algo::bfs(store, g, bfs_params(starts, p)).reached, keep_triples);
    case Algorithm::Jaccard:
      return pack(algo::jaccard(store, g), keep_triples);
    case Algorithm::KTruss:
      if (g.schema == Schema::Incidence) return pack(algo::ktruss_edge(store, g, {p.k}).main, keep_triples);
      return pack(algo::ktruss_adj(store, g, {p.k}).main, keep_triples);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm");
}

namespace {

std::string failure(const std::exception& e) {
  if (auto* d = dynamic_cast<const Error*>(&e)) return "failed:" + std::string(to_string(d->code()));
  return "failed:exception";
}

struct Group {
  int scale;
  std::uint64_t seed;
};

/// Every cell of one generated graph, on a store of its own.
void run_group(const Matrix& m, const std::vector<std::pair<Algorithm, Schema>>& cells, const Group& grp,
               const std::filesystem::path& dir, const Sink& emit) {
  gen::GenConfig cfg;
  cfg.scale = grp.scale;
  cfg.edges_per_vertex = m.degree;
  cfg.seed = grp.seed;
  auto edges = normalize(gen::generate(cfg));
  auto starts = pick_starts(edges, grp.seed, m.params.starts);

  std::filesystem::remove_all(dir);
  kv::StoreOptions opts;
  opts.sync = m.sync;
  auto store = kv::Store::open(dir, opts);

  for (auto schema : m.schemas) {
    auto blank = [&](Algorithm alg, algo::Mode mode) {
      Record r;
      r.algorithm = alg;
      r.schema = schema;
      r.mode = mode;
      r.scale = grp.scale;
      r.degree = m.degree;
      r.seed = grp.seed;
      return r;
    };
    GraphBundle g;
    algo::StoredGraph sg;
    try {
      g = build(edges, schema);
      sg = algo::store_graph(store, "g" + std::string(to_string(schema)), g);
    } catch (const std::exception& e) {
      for (const auto& [alg, s] : cells) {
        if (s != schema) continue;
        for (auto mode : m.modes) {
          auto r = blank(alg, mode);
          r.status = failure(e);
          emit(r);
        }
      }
      continue;
    }
    for (const auto& [alg, s] : cells) {
      if (s != schema) continue;
      for (auto mode : m.modes) {
        auto r = blank(alg, mode);
        auto t0 = std::chrono::steady_clock::now();
        double query = 0;
        try {
          if (mode == algo::Mode::Local) {
            std::optional<GraphBundle> loaded;
            if (m.include_query_time) {
              auto q0 = std::chrono::steady_clock::now();
              loaded = algo::load_graph(store, sg);
              query = seconds_since(q0);
            }
            const GraphBundle& input = loaded ? *loaded : g;
            run_local(alg, input, starts, m.params);  // warmup
            t0 = std::chrono::steady_clock::now();
            r.entries = run_local(alg, input, starts, m.params).entries;
          } else {
            run_server(alg, store, sg, starts, m.params);  // warmup
            t0 = std::chrono::steady_clock::now();
            r.entries = run_server(alg, store, sg, starts, m.params).entries;
          }
          r.wall_seconds = seconds_since(t0);
        } catch (const std::exception& e) {
          r.wall_seconds = seconds_since(t0);
          r.status = failure(e);
        }
        emit(r);
        if (mode == algo::Mode::Local && m.include_query_time && r.ok()) {
          r.includes_query_time = true;
          r.wall_seconds += query;
          emit(r);
        }
      }
    }
  }
  std::filesystem::remove_all(dir);
}

}  // namespace

void run(const Matrix& m, const Sink& sink) {
  auto cells = expand_cells(m);
  std::vector<Group> groups;
  for (int s : m.scales) {
    for (int seed = 1; seed <= m.seeds; ++seed) groups.push_back({s, static_cast<std::uint64_t>(seed)});
  }
  bool own_root = m.work_dir.empty();
  auto root = own_root ? std::filesystem::temp_directory_path() / ("d4m-bench-" + std::to_string(::getpid()))
                       : m.work_dir;
  std::filesystem::create_directories(root);

  std::mutex mu;
  auto emit = [&](const Record& r) {
    std::lock_guard lk(mu);
    sink(r);
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < groups.size();) {
      const auto& g = groups[i];
      try {
        run_group(m, cells, g, root / ("s" + std::to_string(g.scale) + "-r" + std::to_string(g.seed)), emit);
      } catch (const std::exception& e) {
        // Generation or store setup failed before any cell ran.
        for (const auto& [alg, schema] : cells) {
          for (auto mode : m.modes) {
            Record r;
            r.algorithm = alg;
            r.schema = schema;
            r.mode = mode;
            r.scale = g.scale;
            r.degree = m.degree;
            r.seed = g.seed;
            r.status = failure(e);
            emit(r);
          }
        }
      }
    }
  };
  int jobs = std::max(1, std::min<int>(m.jobs, static_cast<int>(groups.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (own_root) std::filesystem::remove_all(root);
}

}  // namespace d4m::bench
