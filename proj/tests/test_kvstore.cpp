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

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <map>
#include <random>

#include "d4m/error.hpp"
#include "d4m/gen.hpp"
#include "d4m/graph.hpp"
#include "d4m/kv/encoding.hpp"
#include "d4m/kv/fault.hpp"
#include "d4m/kv/store.hpp"
#include "test_support.hpp"

namespace d4m {
namespace {

using kv::Store;
using kv::StoreOptions;
using testutil::TempDir;

StoreOptions fast() {
  StoreOptions o;
  o.sync = false;
  return o;
}

std::vector<Key> key_corpus(std::mt19937_64& rng) {
  std::vector<Key> keys = {Key(0.0), Key(-0.0), Key(1.0), Key(-1.0), Key(1e300), Key(-1e300), Key(5e-324),
                           Key(-5e-324), Key(std::numeric_limits<double>::infinity()),
                           Key(-std::numeric_limits<double>::infinity()), Key(""), Key(std::string("\0", 1)),
                           Key(std::string("a\0b", 3)), Key("a"), Key("ab"), Key("\xff"), Key("\xff\xff")};
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 300; ++i) {
    keys.emplace_back(d(rng));
    keys.emplace_back(testutil::random_word(rng, 5, std::string("ab\0\xff", 4)));
  }
  return keys;
}

TEST(KeyEncoding, OrderMatchesKeyOrder) {
  std::mt19937_64 rng(11);
  auto keys = key_corpus(rng);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (std::size_t j = 0; j < keys.size(); j += 7) {
      auto ei = kv::encode_key(keys[i]), ej = kv::encode_key(keys[j]);
      EXPECT_EQ(keys[i] < keys[j], ei < ej) << keys[i] << " vs " << keys[j];
      EXPECT_EQ(keys[i] == keys[j], ei == ej);
    }
  }
}

TEST(KeyEncoding, RoundTripAndLength) {
  std::mt19937_64 rng(12);
  for (const auto& k : key_corpus(rng)) {
    auto cell = kv::encode_cell(k, Key("col"));
    auto n = kv::encoded_key_length(cell);
    EXPECT_EQ(n, kv::encode_key(k).size());
    EXPECT_EQ(kv::decode_key(cell), k);
    EXPECT_EQ(kv::decode_key(std::string_view(cell).substr(n)), Key("col"));
  }
}

TEST(KeyEncoding, CellOrderIsRowThenColumn) {
  std::vector<std::pair<Key, Key>> cells = {{"a", "z"}, {"ab", "a"}, {1.0, "x"}, {"a", 2.0}, {"a", "y"}};
  auto sorted = cells;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> enc;
  for (auto& [r, c] : cells) enc.push_back(kv::encode_cell(r, c));
  std::sort(enc.begin(), enc.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    EXPECT_EQ(enc[i], kv::encode_cell(sorted[i].first, sorted[i].second));
  }
}

TEST(KeyEncoding, RejectsGarbage) {
  EXPECT_THROW(kv::encoded_key_length(""), Error);
  EXPECT_THROW(kv::encoded_key_length("\x07"), Error);
  EXPECT_THROW(kv::encoded_key_length("\x02" "abc"), Error);
  EXPECT_THROW(kv::encoded_key_length("\x01\x02"), Error);
}

TEST(Store, FreshDirectoryHasNoTables) {
  TempDir d;
  auto s = Store::open(d.path / "db", fast());
  EXPECT_TRUE(s.tables().empty());
}

TEST(Store, ReopenKeepsTablesAndCounts) {
  TempDir d;
  {
    auto s = Store::open(d.path);
    auto t = s.bind("T1");
    t.put({{"a", "b", 1}, {"a", "c", 2}});
    t.flush();
    s.bind("empty");
  }
  auto s = Store::open(d.path);
  EXPECT_EQ(s.tables(), (std::vector<std::string>{"T1", "empty"}));
  EXPECT_EQ(s.bind("T1").count(), 2u);
  EXPECT_EQ(s.bind("empty").count(), 0u);
}

TEST(Store, InvalidNames) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  for (const char* bad : {"", "a b", "x/y", "t.run", "é"}) {
    try {
      s.bind(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidName);
    }
  }
  EXPECT_NO_THROW(s.bind("Ok_name-9"));
}

TEST(Store, BindTwiceIsSameTable) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto t1 = s.bind("t");
  t1.put({"r", "c", 3});
  t1.flush();
  auto t2 = s.bind("t");
  EXPECT_EQ(t2.scan(), (std::vector<Triple>{{"r", "c", 3}}));
}

TEST(Store, PutScanAndLastWriteWins) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto t = s.bind("t");
  EXPECT_TRUE(t.scan().empty());
  t.put({"r", "c", 1});
  t.put({"r", "c", 2});
  t.flush();
  EXPECT_EQ(t.scan(), (std::vector<Triple>{{"r", "c", 2}}));
  t.put({"r", "c", 5});
  t.flush();
  EXPECT_EQ(t.get("r", "c"), Value(5));
  EXPECT_EQ(t.get("r", "x"), std::nullopt);
}

TEST(Store, EraseAndZeroWriteHideOlderRuns) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto t = s.bind("t");
  t.put({{"a", "1", 1}, {"b", "1", 2}, {"c", "1", 3}});
  t.flush();
  t.erase("a", "1");
  t.put({"b", "1", 0});
  t.flush();
  EXPECT_EQ(t.scan(), (std::vector<Triple>{{"c", "1", 3}}));
  t.put({"a", "1", 9});
  t.flush();
  EXPECT_EQ(t.count(), 2u);
}

TEST(Store, MixedValueKindsRejected) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto t = s.bind("t");
  t.put({"r", "c", 1});
  EXPECT_THROW(t.put({"r", "d", "text"}), Error);
  t.flush();
  auto u = s.bind("t");
  try {
    u.put({"r", "e", "x"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MixedValueVariant);
  }
}

TEST(Store, SecondWriterConflicts) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto w1 = s.bind("t");
  auto w2 = s.bind("t");
  w1.put({"a", "b", 1});
  try {
    w2.put({"a", "c", 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WriterConflict);
  }
  w1.flush();
  EXPECT_NO_THROW(w2.put({"a", "c", 1}));
  w2.flush();
  EXPECT_EQ(w1.count(), 2u);
}

TEST(Store, FlushIdempotentAndReopen) {
  TempDir d;
  {
    auto s = Store::open(d.path);
    auto t = s.bind("t");
    t.put({"a", "b", 1});
    t.flush();
    t.flush();
    t.flush();
  }
  std::size_t runs = 0;
  for (const auto& e : std::filesystem::directory_iterator(d.path)) runs += e.path().extension() == ".run";
  EXPECT_EQ(runs, 1u);
  auto s = Store::open(d.path);
  EXPECT_EQ(s.bind("t").scan(), (std::vector<Triple>{{"a", "b", 1}}));
}

TEST(Store, DeleteThenBindIsEmpty) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  {
    auto t = s.bind("t");
    t.put({"a", "b", 1});
    t.flush();
  }
  s.delete_table("t");
  EXPECT_FALSE(s.has_table("t"));
  for (const auto& e : std::filesystem::directory_iterator(d.path)) EXPECT_NE(e.path().extension(), ".run");
  EXPECT_EQ(s.bind("t").count(), 0u);
}

TEST(Store, HundredTablesStayIndependent) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  for (int i = 0; i < 100; ++i) {
    auto t = s.bind("t" + std::to_string(i));
    std::vector<Triple> rows;
    for (int j = 0; j <= i; ++j) rows.push_back({Key("r" + std::to_string(j)), Key("c"), Value(i + 1)});
    t.put(rows);
    t.flush();
  }
  auto again = Store::open(d.path, fast());
  for (int i = 0; i < 100; ++i) {
    auto got = again.bind("t" + std::to_string(i)).scan();
    ASSERT_EQ(got.size(), static_cast<std::size_t>(i + 1));
    for (const auto& t : got) EXPECT_EQ(t.val, Value(i + 1));
  }
}

TEST(Store, GraphIngestCountIsDistinctCells) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto e = gen::generate({10, 16, 1});
  auto triples = edges_to_triples(e);
  std::set<std::pair<Key, Key>> distinct;
  for (const auto& t : triples) distinct.emplace(t.row, t.col);
  auto t = s.bind("g");
  auto rep = t.put(triples);
  EXPECT_EQ(rep.count, triples.size());
  t.flush();
  EXPECT_EQ(t.count(), distinct.size());
}

TEST(Store, TextValuesAndConcatCombiner) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto t = s.bind("cat", kv::Combiner::Concat);
  t.put({"r", "c", "x"});
  t.flush();
  t.put({"r", "c", "y"});
  t.put({"r", "c", "z"});
  t.flush();
  EXPECT_EQ(t.get("r", "c"), Value("x;y;z"));
  EXPECT_THROW(t.put({"r", "c", 1}), Error);
}

TEST(Store, CorruptManifestDetected) {
  TempDir d;
  {
    auto s = Store::open(d.path);
    s.bind("t").put({"a", "b", 1});
  }
  {
    std::fstream f(d.path / "MANIFEST", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(16);
    f.put('#');
  }
  try {
    Store::open(d.path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptManifest);
  }
}

std::filesystem::path only_run(const std::filesystem::path& dir) {
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".run") return e.path();
  }
  return {};
}

TEST(Store, DamagedRunFooterFailsOpen) {
  TempDir d;
  {
    auto s = Store::open(d.path);
    s.bind("t").put({"a", "b", 1});
  }
  auto run = only_run(d.path);
  std::filesystem::resize_file(run, std::filesystem::file_size(run) - 3);
  try {
    Store::open(d.path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptManifest);
  }
}

TEST(Store, DamagedBlockFailsScanWithChecksumError) {
  TempDir d;
  {
    auto s = Store::open(d.path);
    s.bind("t").put({"alpha", "beta", 1});
  }
  auto run = only_run(d.path);
  {
    std::fstream f(run, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20);
    f.put('\x7f');
  }
  auto s = Store::open(d.path);
  try {
    s.bind("t").scan();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptRun);
  }
}

TEST(Store, OpenCollectsStrayFiles) {
  TempDir d;
  { Store::open(d.path).bind("t").put({"a", "b", 1}); }
  std::ofstream(d.path / "rdead.run") << "junk";
  std::ofstream(d.path / "half.run.tmp") << "junk";
  auto s = Store::open(d.path);
  EXPECT_FALSE(std::filesystem::exists(d.path / "rdead.run"));
  EXPECT_FALSE(std::filesystem::exists(d.path / "half.run.tmp"));
  EXPECT_EQ(s.bind("t").count(), 1u);
}

// ---- scans against the in-memory pipeline ----

struct RandomTable {
  std::map<std::pair<Key, Key>, Value> cells;
};

RandomTable fill_random(kv::TableHandle& t, std::mt19937_64& rng, std::size_t ops, std::size_t pool) {
  RandomTable oracle;
  std::uniform_int_distribution<std::size_t> pk(0, pool - 1);
  std::uniform_int_distribution<int> pv(0, 9), action(0, 19);
  auto key = [&]() -> Key {
    auto id = pk(rng);
    if (id % 4 == 0) return Key(static_cast<double>(id));
    return Key("k" + std::to_string(id));
  };
  for (std::size_t i = 0; i < ops; ++i) {
    Key r = key(), c = key();
    int a = action(rng);
    if (a == 0) {
      t.erase(r, c);
      oracle.cells.erase({r, c});
    } else {
      int v = pv(rng);
      t.put({r, c, Value(v == 0 ? 47 : v)});
      oracle.cells[{r, c}] = Value(v == 0 ? 47 : v);
    }
  }
  t.flush();
  return oracle;
}

Assoc assoc_of(const RandomTable& r) {
  std::vector<Triple> t;
  for (const auto& [k, v] : r.cells) t.push_back({k.first, k.second, v});
  return Assoc::from_triples(t);
}

std::vector<Selector> selector_corpus(const Assoc& a) {
  std::vector<Selector> s = {Selector::all(),
                             Selector::range(Key("k1"), Key("k3")),
                             Selector::range(Key(4.0), Key("k2")),
                             Selector::range(Key("k55"), Key("k55")),
                             Selector::prefix("k1"),
                             Selector::prefix("zz"),
                             Selector::positional(2, 5),
                             Selector::positional(1, 1),
                             Selector::positional(40, 1000)};
  std::vector<Key> some;
  for (std::size_t i = 0; i < a.row_keys().size(); i += 3) some.push_back(a.row_keys()[i]);
  some.push_back(Key("missing"));
  s.push_back(Selector::list(some));
  s.push_back(Selector::list({Key(8.0), Key("k13")}));
  return s;
}

void check_scans(kv::TableHandle& t, const Assoc& a) {
  ASSERT_EQ(t.to_assoc(), a);
  auto sels = selector_corpus(a);
  for (const auto& rs : sels) {
    for (const auto& cs : sels) {
      kv::IteratorSpec spec;
      spec.then(kv::RangeFilter{rs, cs});
      ASSERT_EQ(t.to_assoc(spec), select(a, rs, cs)) << to_string(rs) << " x " << to_string(cs);
    }
  }
  for (double v : {47.0, 3.0, 100.0}) {
    kv::IteratorSpec spec;
    spec.then(kv::ValueFilter{Value(v)});
    ASSERT_EQ(t.to_assoc(spec), equals_value(a, Value(v)));
    kv::IteratorSpec chained;
    chained.then(kv::RangeFilter{Selector::prefix("k"), Selector::all()}).then(kv::ValueFilter{Value(v)});
    ASSERT_EQ(t.to_assoc(chained), equals_value(select(a, Selector::prefix("k"), Selector::all()), Value(v)));
  }
}

TEST(StoreScan, MatchesSelectOnRandomTables) {
  std::mt19937_64 rng(5);
  for (std::size_t ops : {0u, 1u, 50u, 2000u}) {
    TempDir d;
    StoreOptions o = fast();
    o.write_buffer_bytes = 4096;  // many overlapping runs
    o.block_bytes = 256;
    auto s = Store::open(d.path, o);
    auto t = s.bind("t");
    auto oracle = fill_random(t, rng, ops, 60);
    check_scans(t, assoc_of(oracle));
  }
}

TEST(StoreScan, MatchesSelectAtHundredThousandEntries) {
  std::mt19937_64 rng(6);
  TempDir d;
  StoreOptions o = fast();
  o.write_buffer_bytes = 1u << 20;
  auto s = Store::open(d.path, o);
  auto t = s.bind("t");
  std::vector<Triple> triples;
  for (int i = 0; i < 100000; ++i) {
    triples.push_back({Key("k" + std::to_string(i / 100)), Key("k" + std::to_string(i % 100)),
                       Value(i % 13 == 0 ? 47 : i % 7 + 1)});
  }
  std::shuffle(triples.begin(), triples.end(), rng);
  t.put(triples);
  t.flush();
  auto a = Assoc::from_triples(triples);
  ASSERT_EQ(t.count(), 100000u);
  kv::IteratorSpec r;
  r.then(kv::RangeFilter{Selector::range(Key("k1"), Key("k3")), Selector::all()});
  EXPECT_EQ(t.to_assoc(r), select(a, Selector::range(Key("k1"), Key("k3")), Selector::all()));
  kv::IteratorSpec v;
  v.then(kv::ValueFilter{Value(47.0)});
  EXPECT_EQ(t.to_assoc(v), equals_value(a, Value(47.0)));
  kv::IteratorSpec p;
  p.then(kv::RangeFilter{parse_positional("100:200"), parse_selector("k5* ")});
  EXPECT_EQ(t.to_assoc(p), select(a, parse_positional("100:200"), parse_selector("k5* ")));
}

TEST(StoreScan, DegreeFilterMatchesDegreeTable) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto g = build_adjacency(normalize(gen::generate({7, 8, 3})));
  auto a = s.bind("A");
  auto deg = s.bind("ADeg");
  put_assoc(a, g.main);
  put_assoc(deg, g.degree);
  a.flush();
  deg.flush();
  kv::IteratorSpec spec;
  spec.then(kv::DegreeFilter{3, 10, "ADeg"});
  std::vector<Key> keep;
  for (const auto& t : g.degree.to_triples()) {
    if (t.val.number() >= 3 && t.val.number() <= 10) keep.push_back(t.row);
  }
  EXPECT_EQ(a.to_assoc(spec), select(g.main, Selector::list(keep), Selector::all()));

  kv::IteratorSpec missing;
  missing.then(kv::DegreeFilter{0, 1, "nope"});
  EXPECT_THROW(a.scan(missing), Error);
}

TEST(StoreScan, MultiplyJoinOnlyAsJobTail) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto t = s.bind("t");
  t.put({"a", "b", 1});
  t.flush();
  kv::IteratorSpec spec;
  spec.then(kv::MultiplyJoin{"t", MultiplyMode::Arith, "out"});
  EXPECT_THROW(t.scan(spec), Error);
  kv::IteratorSpec bad;
  bad.then(kv::MultiplyJoin{"t", MultiplyMode::Arith, "out"}).then(kv::ValueFilter{Value(1)});
  try {
    s.run_job(t, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidIteratorSpec);
  }
}

// ---- multiply ----

Assoc stored_product(Store& s, const Assoc& a, const Assoc& b, MultiplyMode mode, bool use_transposed = false) {
  auto ta = s.bind(s.temp_name("a"));
  auto tb = s.bind(s.temp_name("b"));
  put_assoc(ta, use_transposed ? transpose(a) : a);
  put_assoc(tb, b);
  ta.flush();
  tb.flush();
  auto sink = s.bind(s.temp_name("c"));
  if (use_transposed) {
    kv::table_mult_transposed(ta, tb, sink, mode);
  } else {
    kv::table_mult(ta, tb, sink, mode);
  }
  return sink.to_assoc();
}

TEST(TableMult, IdentityAndEmpty) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  std::mt19937_64 rng(8);
  auto t = testutil::random_assoc(rng, 200, 20);
  auto id = identity(t.row_keys());
  EXPECT_EQ(stored_product(s, id, t, MultiplyMode::Arith), t);
  EXPECT_TRUE(stored_product(s, Assoc{}, t, MultiplyMode::Arith).empty());
}

TEST(TableMult, AdjacencySquaredAtScaleEight) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto g = build_adjacency(normalize(gen::generate({8, 16, 1})));
  auto want = matmul(g.main, g.main);
  auto got = stored_product(s, g.main, g.main, MultiplyMode::Arith);
  EXPECT_EQ(got.to_triples(), want.to_triples());
}

TEST(TableMult, RandomOperandsAllModes) {
  std::mt19937_64 rng(9);
  TempDir d;
  StoreOptions o = fast();
  o.write_buffer_bytes = 2048;  // force partial-product spills
  auto s = Store::open(d.path, o);
  for (int round = 0; round < 6; ++round) {
    auto a = testutil::random_assoc(rng, 150, 15);
    auto b = testutil::random_assoc(rng, 150, 15);
    for (auto mode : {MultiplyMode::Arith, MultiplyMode::CatKey, MultiplyMode::CatVal}) {
      EXPECT_EQ(stored_product(s, a, b, mode), matmul(a, b, mode)) << round;
      EXPECT_EQ(stored_product(s, a, b, mode, true), matmul(a, b, mode)) << round;
    }
  }
}

TEST(TableMult, SinkCollisionAndCombinerClash) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto a = s.bind("a");
  a.put({"x", "y", 1});
  a.flush();
  try {
    kv::table_mult(a, a, a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SinkCollision);
  }
  auto lww = s.bind("full");
  lww.put({"q", "q", 1});
  lww.flush();
  EXPECT_THROW(kv::table_mult(a, a, lww), Error);
}

TEST(TableMult, UpperTriangleLogicalAndTransposedOutput) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto g = build_adjacency(normalize(gen::generate({6, 8, 2})));
  auto a = s.bind("A");
  put_assoc(a, g.main);
  a.flush();
  auto full = matmul(logical(g.main), logical(g.main));
  std::vector<Triple> upper;
  for (const auto& t : full.to_triples()) {
    if (t.row < t.col) upper.push_back(t);
  }
  kv::TableMultOptions opts;
  opts.upper_triangle_only = true;
  opts.logical = true;
  auto sink = s.bind("U");
  kv::table_mult_transposed(a, a, sink, MultiplyMode::Arith, opts);
  EXPECT_EQ(sink.scan(), upper);

  opts.upper_triangle_only = false;
  opts.transpose_output = true;
  auto sink_t = s.bind("UT");
  kv::table_mult_transposed(a, a, sink_t, MultiplyMode::Arith, opts);
  EXPECT_EQ(sink_t.to_assoc(), transpose(full));
}

TEST(MultiplyJoinJob, MatchesMatmulWithAndWithoutMask) {
  std::mt19937_64 rng(10);
  TempDir d;
  auto s = Store::open(d.path, fast());
  for (int round = 0; round < 4; ++round) {
    auto a = testutil::random_assoc(rng, 200, 18);
    auto b = testutil::random_assoc(rng, 200, 18);
    auto ta = s.bind("ja" + std::to_string(round));
    auto tb = s.bind("jb" + std::to_string(round));
    put_assoc(ta, a);
    put_assoc(tb, b);
    ta.flush();
    tb.flush();
    for (auto mode : {MultiplyMode::Arith, MultiplyMode::CatKey, MultiplyMode::CatVal}) {
      auto sink = s.temp_name("j");
      kv::IteratorSpec spec;
      spec.then(kv::MultiplyJoin{tb.name(), mode, sink});
      s.run_job(ta, spec);
      EXPECT_EQ(s.bind(sink).to_assoc(), matmul(a, b, mode));
    }
    auto masked = s.temp_name("m");
    kv::IteratorSpec spec;
    spec.then(kv::MultiplyJoin{tb.name(), MultiplyMode::Arith, masked, true});
    s.run_job(ta, spec);
    auto prod = matmul(a, b);
    auto s_a = testutil::support(a);
    std::vector<Triple> want;
    for (const auto& t : prod.to_triples()) {
      if (s_a.count({t.row, t.col})) want.push_back(t);
    }
    EXPECT_EQ(s.bind(masked).scan(), want);
  }
}

TEST(ThresholdJoin, KeepsWeightedCells) {
  TempDir d;
  auto s = Store::open(d.path, fast());
  auto a = s.bind("a");
  auto w = s.bind("w");
  a.put({{"a", "b", 1}, {"a", "c", 1}, {"b", "c", 1}});
  w.put({{"a", "b", 2}, {"b", "c", 1}, {"z", "z", 5}});
  a.flush();
  w.flush();
  auto out = s.bind("out");
  auto rep = kv::threshold_join(a, w, 1.5, out);
  EXPECT_EQ(out.scan(), (std::vector<Triple>{{"a", "b", 1}}));
  EXPECT_EQ(rep.entries_read, 3u);
  EXPECT_EQ(rep.entries_written, 1u);
  EXPECT_NE(rep.to_text().find("entries_written=1\n"), std::string::npos);
}

TEST(TableMult, WorkingSetStaysBoundedAsOperandsGrow) {
  std::vector<double> ratios;
  for (int scale : {8, 10}) {
    TempDir d;
    MemoryTracker tracker;
    StoreOptions o = fast();
    o.tracker = &tracker;
    o.write_buffer_bytes = 1u << 20;
    auto s = Store::open(d.path, o);
    auto g = build_adjacency(normalize(gen::generate({scale, 16, 1})));
    auto a = s.bind("A");
    put_assoc(a, g.main);
    a.flush();
    tracker.reset_peak();
    auto sink = s.bind("C");
    kv::table_mult_transposed(a, a, sink, MultiplyMode::Arith);
    auto in_memory = 2 * g.main.byte_size() + matmul(g.main, g.main).byte_size();
    ratios.push_back(static_cast<double>(in_memory) / static_cast<double>(tracker.peak()));
  }
  EXPECT_GT(ratios[1], ratios[0]);
}

// ---- crash safety ----

using Snapshot = std::vector<Triple>;

/// Child: performs `flushes` flushes of growing content, reporting "b<i>"
/// before and "d<i>" after each on `fd`.
[[noreturn]] void crash_child(const std::filesystem::path& dir, int fd, std::uint64_t crash_after, int flushes) {
  kv::fault::crash_after(crash_after);
  auto s = Store::open(dir);
  auto t = s.bind("t");
  for (int i = 0; i < flushes; ++i) {
    for (int j = 0; j < 300; ++j) t.put({Key("r" + std::to_string(j)), Key("c" + std::to_string(i)), Value(i + 1)});
    if (i > 0) t.erase("r0", Key("c" + std::to_string(i - 1)));
    char msg[16];
    auto n = std::snprintf(msg, sizeof msg, "b%d\n", i);
    (void)!::write(fd, msg, static_cast<std::size_t>(n));
    t.flush();
    n = std::snprintf(msg, sizeof msg, "d%d\n", i);
    (void)!::write(fd, msg, static_cast<std::size_t>(n));
  }
  ::_exit(0);
}

Snapshot expected_after(int completed) {
  std::map<std::pair<Key, Key>, Value> m;
  for (int i = 0; i < completed; ++i) {
    for (int j = 0; j < 300; ++j) m[{Key("r" + std::to_string(j)), Key("c" + std::to_string(i))}] = Value(i + 1);
    if (i > 0) m.erase({Key("r0"), Key("c" + std::to_string(i - 1))});
  }
  Snapshot out;
  for (auto& [k, v] : m) out.push_back({k.first, k.second, v});
  return out;
}

TEST(Durability, InjectedCrashesKeepLastCompletedFlush) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::uint64_t> point(1, 60);
  for (int trial = 0; trial < 12; ++trial) {
    TempDir d;
    int pipefd[2];
    ASSERT_EQ(::pipe(pipefd), 0);
    auto at = point(rng);
    pid_t pid = ::fork();
    if (pid == 0) {
      ::close(pipefd[0]);
      crash_child(d.path, pipefd[1], at, 4);
    }
    ::close(pipefd[1]);
    std::string log;
    char buf[256];
    for (ssize_t n; (n = ::read(pipefd[0], buf, sizeof buf)) > 0;) log.append(buf, static_cast<std::size_t>(n));
    ::close(pipefd[0]);
    int status = 0;
    ::waitpid(pid, &status, 0);
    ASSERT_TRUE(WIFEXITED(status));
    int done = 0, begun = 0;
    for (std::size_t p = 0; p < log.size(); p += 3) {
      (log[p] == 'd' ? done : begun) = log[p + 1] - '0' + 1;
    }
    auto s = Store::open(d.path);
    auto got = s.has_table("t") ? s.bind("t").scan() : Snapshot{};
    if (got != expected_after(done)) {
      EXPECT_EQ(begun, done + 1) << "crash point " << at;
      EXPECT_EQ(got, expected_after(begun)) << "crash point " << at;
    }
  }
}

}  // namespace
}  // namespace d4m
