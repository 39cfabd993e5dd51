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

#include "d4m/gen.hpp"

#include <map>

#include "d4m/error.hpp"

namespace d4m::gen {

std::uint64_t CounterStream::bits(std::uint64_t counter) const noexcept {
  std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterStream::uniform(std::uint64_t counter) const noexcept {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

namespace {

void validate(const GenConfig& cfg) {
  if (cfg.scale > kMaxScale) {
    throw Error(ErrorCode::ScaleTooLarge, "scale " + std::to_string(cfg.scale) + " exceeds " +
                                              std::to_string(kMaxScale));
  }
  if (cfg.scale < 1 || cfg.edges_per_vertex < 1) {
    throw Error(ErrorCode::InvalidArgument, "scale and edges-per-vertex must be at least 1");
  }
}

inline VertexPair draw_edge(const CounterStream& rng, std::uint64_t edge, int scale) {
  constexpr double ab = kA + kB;
  constexpr double c_norm = kC / (kC + kD);
  constexpr double a_norm = kA / (kA + kB);
  std::uint64_t i = 0, j = 0;
  std::uint64_t counter = edge * 2 * static_cast<std::uint64_t>(scale);
  for (int level = 0; level < scale; ++level) {
    const bool ii = rng.uniform(counter++) > ab;
    const bool jj = rng.uniform(counter++) > (ii ? c_norm : a_norm);
    i |= static_cast<std::uint64_t>(ii) << level;
    j |= static_cast<std::uint64_t>(jj) << level;
  }
  return {i, j};
}

std::uint64_t edge_total(const GenConfig& cfg) {
  return static_cast<std::uint64_t>(cfg.edges_per_vertex) << cfg.scale;
}

}  // namespace

std::vector<VertexPair> kronecker_pairs(const GenConfig& cfg) {
  validate(cfg);
  const CounterStream rng(cfg.seed);
  const auto m = static_cast<std::int64_t>(edge_total(cfg));
  std::vector<VertexPair> out(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < m; ++e) out[e] = draw_edge(rng, static_cast<std::uint64_t>(e), cfg.scale);
  return out;
}

std::vector<VertexPair> kronecker_pairs_serial(const GenConfig& cfg) {
  validate(cfg);
  const CounterStream rng(cfg.seed);
  std::vector<VertexPair> out;
  out.reserve(edge_total(cfg));
  for (std::uint64_t e = 0; e < edge_total(cfg); ++e) out.push_back(draw_edge(rng, e, cfg.scale));
  return out;
}

std::string vertex_key(std::uint64_t id, int scale) {
  const std::size_t width = std::to_string((std::uint64_t{1} << scale) - 1).size();
  std::string digits = std::to_string(id);
  return std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

EdgeList generate(const GenConfig& cfg) {
  auto pairs = kronecker_pairs(cfg);
  EdgeList e;
  e.edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) e.edges.push_back({Key(vertex_key(u, cfg.scale)), Key(vertex_key(v, cfg.scale)), 1.0});
  return e;
}

std::vector<std::pair<std::size_t, std::size_t>> degree_histogram(const EdgeList& e) {
  EdgeList n = normalize(e);
  std::map<Key, std::size_t> degree;
  for (const auto& edge : n.edges) {
    ++degree[edge.u];
    if (!n.directed) ++degree[edge.v];
  }
  std::map<std::size_t, std::size_t, std::greater<>> hist;
  for (const auto& [v, d] : degree) ++hist[d];
  return {hist.begin(), hist.end()};
}

}  // namespace d4m::gen
