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

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "d4m/graph.hpp"

namespace d4m::gen {

/// Quadrant probabilities of the unpermuted Kronecker generator.
inline constexpr double kA = 0.57, kB = 0.19, kC = 0.19, kD = 0.05;
inline constexpr int kMaxScale = 30;

struct GenConfig {
  int scale = 10;            // 2^scale vertices
  int edges_per_vertex = 16; // edges_per_vertex * 2^scale edge insertions
  std::uint64_t seed = 1;
};

/// Counter-based SplitMix64 stream: draw(i) depends only on (seed, i), so
/// any edge range can be generated independently.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t bits(std::uint64_t counter) const noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept;

 private:
  std::uint64_t seed_;
};

using VertexPair = std::pair<std::uint64_t, std::uint64_t>;

/// Raw vertex-id pairs. Edge e consumes stream counters [2*s*e, 2*s*(e+1)).
std::vector<VertexPair> kronecker_pairs(const GenConfig& cfg);
/// Single-threaded reference kept for testing the OpenMP version.
std::vector<VertexPair> kronecker_pairs_serial(const GenConfig& cfg);

/// Zero-padded decimal vertex key wide enough for 2^scale - 1.
std::string vertex_key(std::uint64_t id, int scale);

/// Edge list with duplicates and self-loops preserved, weight 1.
EdgeList generate(const GenConfig& cfg);

/// (degree, vertex count) pairs of the normalized graph, highest degree first.
std::vector<std::pair<std::size_t, std::size_t>> degree_histogram(const EdgeList& e);

}  // namespace d4m::gen
