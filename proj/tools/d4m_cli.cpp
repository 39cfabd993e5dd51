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

// d4m: generate, ingest, query and benchmark graphs stored as associative
// arrays. Exit status: 0 success, 1 usage, 2 data error, 3 io error.

#include <unistd.h>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "d4m/algos.hpp"
#include "d4m/bench.hpp"
#include "d4m/error.hpp"
#include "d4m/gen.hpp"
#include "d4m/graph.hpp"
#include "d4m/kv/store.hpp"
#include "d4m/triple_io.hpp"

namespace fs = std::filesystem;
using namespace d4m;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kIo = 3;

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidCell:
      return kUsage;
    case ErrorCode::IoFailure:
      return kIo;
    default:
      return kData;
  }
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

kv::StoreOptions store_options(bool no_sync) {
  kv::StoreOptions o;
  o.sync = !no_sync;
  return o;
}

std::vector<int> parse_scales(const std::string& text) {
  std::vector<int> out;
  auto num = [&](std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw Error(ErrorCode::InvalidArgument, "bad scale list '" + text + "'");
    }
    return v;
  };
  std::string_view s = text;
  if (auto colon = s.find(':'); colon != std::string_view::npos) {
    int lo = num(s.substr(0, colon)), hi = num(s.substr(colon + 1));
    if (lo > hi) throw Error(ErrorCode::InvalidArgument, "empty scale range '" + text + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  while (!s.empty()) {
    auto comma = s.find(',');
    out.push_back(num(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

Value parse_value(const std::string& text) {
  double d = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ec == std::errc() && p == text.data() + text.size() && d == d) return Value(d);
  return Value(text);
}

/// Opens --out or falls back to stdout.
struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path, std::ios::openmode mode = std::ios::out) {
    if (path.empty() || path == "-") return;
    file.open(path, mode);
    if (!file) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
    os = &file;
  }
};

// ---- gen ----

struct GenArgs {
  int scale = 10;
  int degree = 16;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  gen::GenConfig cfg;
  cfg.scale = a.scale;
  cfg.edges_per_vertex = a.degree;
  cfg.seed = a.seed;
  auto t0 = std::chrono::steady_clock::now();
  auto t = edges_to_triples(gen::generate(cfg));
  Output o(a.out);
  write_triples(*o.os, t);
  o.os->flush();
  if (!*o.os) throw Error(ErrorCode::IoFailure, "write failed");
  std::cerr << "generated " << t.size() << " edges in " << since(t0) << " s\n";
  return 0;
}

// ---- ingest ----

struct IngestArgs {
  std::string file;
  std::string db;
  std::string table;
  std::string schema = "adjacency";
  bool raw = false;
  bool directed = false;
  bool no_sync = false;
};

int cmd_ingest(const IngestArgs& a) {
  auto t0 = std::chrono::steady_clock::now();
  auto triples = read_triples_file(a.file);
  auto store = kv::Store::open(a.db, store_options(a.no_sync));
  if (a.raw) {
    if (store.has_table(a.table)) store.delete_table(a.table);
    auto h = store.bind(a.table);
    auto rep = h.put(triples);
    h.flush();
    std::cout << "ingested " << rep.count << " triples into " << a.table << " in " << since(t0) << " s\n";
    return 0;
  }
  auto schema = parse_schema(a.schema);
  auto edges = normalize(edges_from_triples(triples, a.directed));
  auto g = build(edges, schema);
  algo::store_graph(store, a.table, g);
  std::cout << "ingested " << edges.edges.size() << " edges into " << a.table << " (" << to_string(schema)
            << ") in " << since(t0) << " s\n";
  return 0;
}

// ---- query ----

struct QueryArgs {
  std::string db;
  std::string table;
  std::string row = ":";
  std::string col = ":";
  std::optional<std::string> value;
  std::string out;
};

int cmd_query(const QueryArgs& a) {
  auto store = kv::Store::open(a.db, store_options(true));
  if (!store.has_table(a.table)) throw Error(ErrorCode::MissingTable, "no table " + a.table);
  kv::IteratorSpec spec;
  spec.then(kv::RangeFilter{parse_selector(a.row), parse_selector(a.col)});
  if (a.value) spec.then(kv::ValueFilter{parse_value(*a.value)});
  auto t = store.bind(a.table).scan(spec);
  Output o(a.out);
  write_triples(*o.os, t);
  o.os->flush();
  return 0;
}

// ---- algo ----

struct AlgoArgs {
  std::string name;
  std::string db;
  std::string table;
  std::optional<std::string> schema;
  std::string mode = "local";
  std::optional<int> scale;
  int degree = 16;
  std::uint64_t seed = 1;
  bench::AlgoParams params;
  std::vector<std::string> start_keys;
  std::string out;
  bool no_sync = false;
};

int cmd_algo(const AlgoArgs& a) {
  auto alg = bench::parse_algorithm(a.name);
  auto mode = algo::parse_mode(a.mode);
  if (a.table.empty() == !a.scale) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --table (stored graph) or --scale (generated)");
  }
  bench::Record r;
  r.algorithm = alg;
  r.mode = mode;
  r.seed = a.seed;

  std::optional<fs::path> scratch;
  fs::path db = a.db;
  if (db.empty()) {
    if (!a.table.empty()) throw Error(ErrorCode::InvalidArgument, "--table needs --db");
    scratch = fs::temp_directory_path() / ("d4m-algo-" + std::to_string(::getpid()));
    db = *scratch;
  }
  struct Cleanup {
    std::optional<fs::path>& p;
    ~Cleanup() {
      std::error_code ec;
      if (p) fs::remove_all(*p, ec);
    }
  } cleanup{scratch};

  auto store = kv::Store::open(db, store_options(a.no_sync || scratch.has_value()));
  algo::StoredGraph sg;
  GraphBundle g;
  std::vector<Key> starts(a.start_keys.begin(), a.start_keys.end());
  if (a.scale) {
    gen::GenConfig cfg;
    cfg.scale = *a.scale;
    cfg.edges_per_vertex = a.degree;
    cfg.seed = a.seed;
    auto edges = normalize(gen::generate(cfg));
    g = build(edges, parse_schema(a.schema.value_or("adjacency")));
    if (starts.empty()) starts = bench::pick_starts(edges, a.seed, a.params.starts);
    r.scale = *a.scale;
    r.degree = a.degree;
    if (mode == algo::Mode::Server) sg = algo::store_graph(store, store.temp_name("graph"), g);
  } else {
    sg = algo::open_graph(store, a.table);
    if (a.schema && parse_schema(*a.schema) != sg.schema) {
      throw Error(ErrorCode::SchemaMismatch, a.table + " is stored as " + std::string(to_string(sg.schema)));
    }
    if (mode == algo::Mode::Local || starts.empty()) g = algo::load_graph(store, sg);
    if (starts.empty()) starts = bench::pick_starts(to_edge_list(g), a.seed, a.params.starts);
  }
  r.schema = a.scale ? g.schema : sg.schema;

  auto t0 = std::chrono::steady_clock::now();
  auto res = mode == algo::Mode::Local ? bench::run_local(alg, g, starts, a.params, !a.out.empty())
                                       : bench::run_server(alg, store, sg, starts, a.params, !a.out.empty());
  r.wall_seconds = since(t0);
  r.entries = res.entries;
  if (a.scale && mode == algo::Mode::Server) {
    for (const auto& t : {sg.main, sg.transpose, sg.degree, sg.name + "Schema"}) {
      if (!t.empty() && store.has_table(t)) store.delete_table(t);
    }
  }
  if (!a.out.empty()) {
    Output o(a.out);
    write_triples(*o.os, res.triples);
    if (!*o.os) throw Error(ErrorCode::IoFailure, "write failed for " + a.out);
  }
  std::cout << bench::csv_header() << bench::to_csv(r) << "\n";
  return 0;
}

// ---- bench ----

struct BenchArgs {
  std::string scales = "8:12";
  int degree = 16;
  std::vector<std::string> algorithms = {"bfs", "jaccard", "ktruss"};
  std::vector<std::string> schemas = {"adjacency", "incidence", "single"};
  std::vector<std::string> modes = {"local", "server"};
  int seeds = 3;
  bool include_query_time = false;
  bench::AlgoParams params;
  std::string out;
  std::string gnuplot;
  std::string work;
  int jobs = 1;
};

int cmd_bench(const BenchArgs& a) {
  bench::Matrix m;
  m.scales = parse_scales(a.scales);
  m.degree = a.degree;
  m.algorithms.clear();
  for (const auto& s : a.algorithms) m.algorithms.push_back(bench::parse_algorithm(s));
  m.schemas.clear();
  for (const auto& s : a.schemas) m.schemas.push_back(parse_schema(s));
  m.modes.clear();
  for (const auto& s : a.modes) m.modes.push_back(algo::parse_mode(s));
  m.seeds = a.seeds;
  m.include_query_time = a.include_query_time;
  m.params = a.params;
  m.jobs = a.jobs;
  m.work_dir = a.work;
  bench::expand_cells(m);

  bool fresh = a.out.empty() || a.out == "-" || !fs::exists(a.out) || fs::file_size(a.out) == 0;
  Output csv(a.out, std::ios::app);
  if (fresh) *csv.os << bench::csv_header() << std::flush;
  std::optional<Output> plot;
  if (!a.gnuplot.empty()) {
    bool plot_fresh = !fs::exists(a.gnuplot) || fs::file_size(a.gnuplot) == 0;
    plot.emplace(a.gnuplot, std::ios::app);
    if (plot_fresh) *plot->os << bench::gnuplot_header() << std::flush;
  }
  std::size_t failed = 0;
  bench::run(m, [&](const bench::Record& r) {
    *csv.os << bench::to_csv(r) << '\n' << std::flush;
    if (plot) *plot->os << bench::to_gnuplot(r) << '\n' << std::flush;
    if (!r.ok()) ++failed;
  });
  if (!*csv.os) throw Error(ErrorCode::IoFailure, "results write failed");
  if (failed) std::cerr << failed << " cell(s) failed\n";
  return failed ? kData : 0;
}

void add_algo_params(CLI::App* c, bench::AlgoParams& p) {
  c->add_option("--starts", p.starts, "random BFS start vertices")->capture_default_str();
  c->add_option("--hops", p.hops, "BFS hops")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--min-deg", p.min_degree, "BFS degree band, lower end")->capture_default_str();
  c->add_option("--max-deg", p.max_degree, "BFS degree band, upper end")->capture_default_str();
  c->add_option("--k", p.k, "truss order")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Associative-array graph toolkit"};
  app.require_subcommand(1);

  GenArgs gen_a;
  auto* gen_c = app.add_subcommand("gen", "write a power-law edge list as triples");
  gen_c->add_option("--scale", gen_a.scale, "log2 of the vertex count")->capture_default_str();
  gen_c->add_option("--degree", gen_a.degree, "edges per vertex")->capture_default_str();
  gen_c->add_option("--seed", gen_a.seed, "generator seed")->capture_default_str();
  gen_c->add_option("--out", gen_a.out, "output file (stdout when omitted)");

  IngestArgs ing;
  auto* ing_c = app.add_subcommand("ingest", "load a triple file into a table");
  ing_c->add_option("file", ing.file, "triple file")->required();
  ing_c->add_option("--db", ing.db, "store directory")->required();
  ing_c->add_option("--table", ing.table, "table (graph) name")->required();
  ing_c->add_option("--schema", ing.schema, "adjacency, incidence or single")->capture_default_str();
  ing_c->add_flag("--raw", ing.raw, "store the triples as one plain table, no graph bundle");
  ing_c->add_flag("--directed", ing.directed, "keep edge direction");
  ing_c->add_flag("--no-sync", ing.no_sync, "skip fsync");

  QueryArgs q;
  auto* q_c = app.add_subcommand("query", "print the triples of a table matching selectors");
  q_c->add_option("--db", q.db, "store directory")->required();
  q_c->add_option("--table", q.table, "table name")->required();
  q_c->add_option("--row", q.row, "row selector")->capture_default_str();
  q_c->add_option("--col", q.col, "column selector")->capture_default_str();
  q_c->add_option("--value", q.value, "keep entries equal to this value");
  q_c->add_option("--out", q.out, "output file (stdout when omitted)");

  AlgoArgs al;
  auto* al_c = app.add_subcommand("algo", "run bfs, jaccard or ktruss once and print its record");
  al_c->add_option("name", al.name, "bfs, jaccard or ktruss")->required();
  al_c->add_option("--db", al.db, "store directory");
  al_c->add_option("--table", al.table, "stored graph name");
  al_c->add_option("--schema", al.schema, "schema of a generated graph, or the expected stored one");
  al_c->add_option("--mode", al.mode, "local or server")->capture_default_str();
  al_c->add_option("--scale", al.scale, "generate a graph of this scale instead of --table");
  al_c->add_option("--degree", al.degree, "edges per vertex for --scale")->capture_default_str();
  al_c->add_option("--seed", al.seed, "generator and start-vertex seed")->capture_default_str();
  al_c->add_option("--start", al.start_keys, "explicit BFS start vertex (repeatable)");
  al_c->add_option("--out", al.out, "export result triples here");
  al_c->add_flag("--no-sync", al.no_sync, "skip fsync");
  add_algo_params(al_c, al.params);

  BenchArgs b;
  auto* b_c = app.add_subcommand("bench", "run the benchmark matrix and append CSV records");
  b_c->add_option("--scales", b.scales, "lo:hi or a comma list")->capture_default_str();
  b_c->add_option("--degree", b.degree, "edges per vertex")->capture_default_str();
  b_c->add_option("--algorithms", b.algorithms, "subset of bfs,jaccard,ktruss")->delimiter(',');
  b_c->add_option("--schemas", b.schemas, "subset of adjacency,incidence,single")->delimiter(',');
  b_c->add_option("--modes", b.modes, "subset of local,server")->delimiter(',');
  b_c->add_option("--seeds", b.seeds, "seeds 1..N per scale")->capture_default_str()->check(CLI::PositiveNumber);
  b_c->add_flag("--include-query-time", b.include_query_time,
                "also record Local cells with the table scan and materialize time added");
  b_c->add_option("--out", b.out, "results file, appended (stdout when omitted)");
  b_c->add_option("--gnuplot", b.gnuplot, "also append long-format rows here");
  b_c->add_option("--work", b.work, "directory for the per-cell stores");
  b_c->add_option("--jobs", b.jobs, "graphs benchmarked concurrently")->capture_default_str();
  add_algo_params(b_c, b.params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*gen_c) return cmd_gen(gen_a);
    if (*ing_c) return cmd_ingest(ing);
    if (*q_c) return cmd_query(q);
    if (*al_c) return cmd_algo(al);
    if (*b_c) return cmd_bench(b);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoFailure: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
