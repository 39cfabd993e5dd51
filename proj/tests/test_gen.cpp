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

#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>
#include <omp.h>

#include "d4m/error.hpp"
#include "d4m/gen.hpp"

using namespace d4m;
using namespace d4m::gen;

TEST(Generate, EdgeAndVertexCounts) {
  EdgeList e = generate({12, 16, 1});
  EXPECT_EQ(e.edges.size(), 65536u);
  for (const auto& x : e.edges) {
    ASSERT_LT(std::stoul(x.u.text()), 4096u);
    ASSERT_LT(std::stoul(x.v.text()), 4096u);
    ASSERT_EQ(x.u.text().size(), 4u);
  }
  EdgeList tiny = generate({1, 1, 7});
  ASSERT_EQ(tiny.edges.size(), 2u);
  for (const auto& x : tiny.edges) {
    EXPECT_TRUE(x.u == Key("0") || x.u == Key("1"));
    EXPECT_TRUE(x.v == Key("0") || x.v == Key("1"));
  }
}

TEST(Generate, DeterministicPerSeed) {
  auto a = kronecker_pairs({10, 16, 42});
  auto b = kronecker_pairs({10, 16, 42});
  auto c = kronecker_pairs({10, 16, 43});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Generate, ParallelMatchesSerial) {
  for (int threads : {1, 3}) {
    omp_set_num_threads(threads);
    for (int s : {1, 5, 11}) EXPECT_EQ(kronecker_pairs({s, 4, 9}), kronecker_pairs_serial({s, 4, 9}));
  }
}

TEST(Generate, FrozenStreamPrefix) {
  // Expected values come from an independent Python rendering of the stream.
  CounterStream rng(1);
  EXPECT_EQ(rng.bits(0), 0x910a2dec89025cc1ULL);
  auto p = kronecker_pairs_serial({4, 1, 1});
  std::vector<VertexPair> head(p.begin(), p.begin() + 4);
  EXPECT_EQ(head, (std::vector<VertexPair>{{10, 4}, {0, 1}, {0, 3}, {0, 4}}));
}

TEST(Generate, ConfigValidation) {
  EXPECT_THROW(generate({31, 1, 1}), Error);
  try {
    generate({31, 1, 1});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ScaleTooLarge);
  }
  EXPECT_THROW(generate({0, 1, 1}), Error);
  EXPECT_THROW(generate({4, 0, 1}), Error);
}

TEST(VertexKey, WidthCoversLargestId) {
  EXPECT_EQ(vertex_key(0, 1), "0");
  EXPECT_EQ(vertex_key(5, 10), "0005");
  EXPECT_EQ(vertex_key(1023, 10), "1023");
  EXPECT_EQ(vertex_key(7, 14), "00007");
  for (int s = 1; s <= 30; ++s) {
    EXPECT_EQ(vertex_key(0, s).size(), static_cast<std::size_t>(std::ceil(s * std::log10(2.0))));
  }
}

TEST(DegreeHistogram, SmallGraphs) {
  EdgeList tri{{{"a", "b"}, {"b", "c"}, {"c", "a"}}, false};
  EXPECT_EQ(degree_histogram(tri), (std::vector<std::pair<std::size_t, std::size_t>>{{2, 3}}));
  EdgeList star;
  for (int i = 1; i <= 5; ++i) star.edges.push_back({"c", "leaf" + std::to_string(i)});
  EXPECT_EQ(degree_histogram(star), (std::vector<std::pair<std::size_t, std::size_t>>{{5, 1}, {1, 5}}));
}

TEST(DegreeHistogram, PowerLawSlopeAtScale14) {
  auto hist = degree_histogram(generate({14, 16, 1}));
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (auto [d, c] : hist) {
    if (d < 4) continue;
    double x = std::log(static_cast<double>(d)), y = std::log(static_cast<double>(c));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  // Frozen from an independent numpy.polyfit over the exported edge file.
  constexpr double kObserved = -1.0190817960016907;
  EXPECT_GE(slope, -3.5);
  EXPECT_LE(slope, -1.0);
  EXPECT_NEAR(slope, kObserved, 0.3);
  EXPECT_NEAR(slope, kObserved, 1e-9);
}

TEST(DegreeHistogram, VertexZeroIsAHub) {
  for (int s : {10, 11}) {
    double rank_fraction = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      EdgeList n = normalize(generate({s, 16, seed}));
      std::map<Key, std::size_t> degree;
      for (const auto& e : n.edges) {
        ++degree[e.u];
        ++degree[e.v];
      }
      const auto d0 = degree[Key(vertex_key(0, s))];
      std::size_t above = 0;
      for (const auto& [v, d] : degree) above += d > d0;
      rank_fraction += static_cast<double>(above) / static_cast<double>(degree.size());
    }
    EXPECT_LE(rank_fraction / 10.0, 0.01) << "scale " << s;
  }
}
