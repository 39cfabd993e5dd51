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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d4m/algos.hpp"
#include "d4m/graph.hpp"

namespace d4m::bench {

enum class Algorithm { BFS, Jaccard, KTruss };

std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view name);

/// Jaccard runs on adjacency only, k-Truss on adjacency and incidence,
/// BFS on every schema.
bool valid_cell(Algorithm a, Schema s) noexcept;

struct Record {
  Algorithm algorithm = Algorithm::BFS;
  Schema schema = Schema::Adjacency;
  algo::Mode mode = algo::Mode::Local;
  int scale = 0;
  int degree = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0;
  std::size_t entries = 0;
  bool includes_query_time = false;
  std::string status = "ok";  // "ok" or "failed:<error class>"

  bool ok() const noexcept { return status == "ok"; }
};

/// Versioned comment line followed by the column names.
std::string csv_header();
std::string to_csv(const Record& r);
/// Parses one data line written by to_csv; nullopt for headers and junk.
std::optional<Record> parse_csv(std::string_view line);
/// Reads every record of a results file, skipping header lines.
std::vector<Record> read_results(const std::filesystem::path& path);

/// Whitespace-separated long format, one record per line, for gnuplot.
std::string gnuplot_header();
std::string to_gnuplot(const Record& r);

struct AlgoParams {
  std::size_t starts = 5;
  int hops = 3;
  double min_degree = 1;
  double max_degree = 100;
  int k = 3;
};

/// `n` distinct vertices of the graph chosen with the counter stream.
std::vector<Key> pick_starts(const EdgeList& e, std::uint64_t seed, std::size_t n);

struct Matrix {
  std::vector<int> scales = {8, 9, 10, 11, 12};
  int degree = 16;
  std::vector<Algorithm> algorithms = {Algorithm::BFS, Algorithm::Jaccard, Algorithm::KTruss};
  std::vector<Schema> schemas = {Schema::Adjacency, Schema::Incidence, Schema::SingleTable};
  std::vector<algo::Mode> modes = {algo::Mode::Local, algo::Mode::Server};
  int seeds = 3;  // seeds 1..seeds
  bool include_query_time = false;
  AlgoParams params;
  int jobs = 1;  // concurrent (scale, seed) groups, each on its own store
  std::filesystem::path work_dir;  // store roots; a temp directory when empty
  bool sync = false;               // fsync the benchmark stores
};

/// (algorithm, schema) pairs of the matrix that are valid cells. Throws
/// InvalidCell when some requested algorithm has no valid schema.
std::vector<std::pair<Algorithm, Schema>> expand_cells(const Matrix& m);

using Sink = std::function<void(const Record&)>;

/// Runs the whole matrix, calling `sink` once per record as soon as it is
/// known. With include_query_time, every Local cell yields a second record
/// whose wall time adds the scan-and-materialize time of the stored graph.
/// A failing cell is reported with a failed status and the run continues.
void run(const Matrix& m, const Sink& sink);

/// Result of one algorithm call, reduced to what the harness records.
struct Outcome {
  std::size_t entries = 0;
  std::vector<Triple> triples;  // only filled when keep_triples is set
};

/// Runs one algorithm on an in-memory bundle (Local) or a stored one (Server).
Outcome run_local(Algorithm a, const GraphBundle& g, const std::vector<Key>& starts, const AlgoParams& p,
                  bool keep_triples = false);
Outcome run_server(Algorithm a, kv::Store& store, const algo::StoredGraph& g, const std::vector<Key>& starts,
                   const AlgoParams& p, bool keep_triples = false);

}  // namespace d4m::bench
