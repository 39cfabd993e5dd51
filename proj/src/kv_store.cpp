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

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "d4m/error.hpp"
#include "d4m/kv/encoding.hpp"
#include "kv/state.hpp"

namespace d4m::kv {

using namespace detail;

namespace {

constexpr std::string_view kManifestHeader = "d4m-manifest 1";
// Rough per-cell bookkeeping cost of a write buffer entry.
constexpr std::size_t kCellOverhead = 64;

[[noreturn]] void bad_manifest(const std::string& what) { throw Error(ErrorCode::CorruptManifest, what); }

std::string_view kind_name(const std::optional<ValueKind>& k) {
  if (!k) return "none";
  return *k == ValueKind::Number ? "number" : "text";
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto p = s.find(sep, start);
    out.push_back(s.substr(start, p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

bool same_file_state(const struct stat& a, const struct stat& b) {
  return a.st_ino == b.st_ino && a.st_size == b.st_size && a.st_mtim.tv_sec == b.st_mtim.tv_sec &&
         a.st_mtim.tv_nsec == b.st_mtim.tv_nsec;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string_view to_string(Combiner c) noexcept {
  switch (c) {
    case Combiner::LastWriteWins:
      return "lww";
    case Combiner::Sum:
      return "sum";
    case Combiner::Concat:
      return "concat";
  }
  return "?";
}

bool valid_table_name(std::string_view name) noexcept {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

bool IteratorSpec::has_multiply() const noexcept {
  return std::any_of(stages.begin(), stages.end(),
                     [](const IteratorStage& s) { return std::holds_alternative<MultiplyJoin>(s); });
}

std::string JobReport::to_text() const {
  std::ostringstream os;
  os << "entries_read=" << entries_read << '\n'
     << "partial_products=" << partial_products << '\n'
     << "entries_written=" << entries_written << '\n'
     << "seconds=" << format_number(seconds) << '\n';
  return os.str();
}

namespace detail {

std::string serialize_manifest(const Manifest& m) {
  std::string out(kManifestHeader);
  out += "\ngeneration " + std::to_string(m.generation) + "\n";
  for (const auto& [name, t] : m.tables) {
    out += "table ";
    out += name;
    out += ' ';
    out += kind_name(t.kind);
    out += ' ';
    out += to_string(t.combiner);
    out += ' ';
    if (t.runs.empty()) out += '-';
    for (std::size_t i = 0; i < t.runs.size(); ++i) {
      if (i) out += ',';
      out += t.runs[i];
    }
    out += '\n';
  }
  char crc[16];
  std::snprintf(crc, sizeof crc, "%08x", crc32(out));
  out += "checksum ";
  out += crc;
  out += '\n';
  return out;
}

Manifest parse_manifest(std::string_view text) {
  auto tail = text.rfind("checksum ");
  if (tail == std::string_view::npos || text.empty() || text.back() != '\n') bad_manifest("missing checksum");
  auto body = text.substr(0, tail);
  char want[16];
  std::snprintf(want, sizeof want, "%08x", crc32(body));
  if (text.substr(tail + 9, text.size() - tail - 10) != want) bad_manifest("checksum mismatch");

  Manifest m;
  auto lines = split(body, '\n');
  if (lines.size() < 2 || lines[0] != kManifestHeader) bad_manifest("bad header");
  auto gen = split(lines[1], ' ');
  if (gen.size() != 2 || gen[0] != "generation") bad_manifest("bad generation line");
  if (std::from_chars(gen[1].data(), gen[1].data() + gen[1].size(), m.generation).ec != std::errc{})
    bad_manifest("bad generation");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split(lines[i], ' ');
    if (f.size() != 5 || f[0] != "table" || !valid_table_name(f[1])) bad_manifest("bad table line");
    TableMeta t;
    if (f[2] == "number") {
      t.kind = ValueKind::Number;
    } else if (f[2] == "text") {
      t.kind = ValueKind::Text;
    } else if (f[2] != "none") {
      bad_manifest("bad value kind");
    }
    if (f[3] == "lww") {
      t.combiner = Combiner::LastWriteWins;
    } else if (f[3] == "sum") {
      t.combiner = Combiner::Sum;
    } else if (f[3] == "concat") {
      t.combiner = Combiner::Concat;
    } else {
      bad_manifest("bad combiner");
    }
    if (f[4] != "-") {
      for (auto r : split(f[4], ',')) {
        if (r.empty()) bad_manifest("empty run id");
        t.runs.emplace_back(r);
      }
    }
    if (!m.tables.emplace(std::string(f[1]), std::move(t)).second) bad_manifest("duplicate table");
  }
  return m;
}

void StoreState::refresh_locked() {
  struct stat now{};
  if (::stat(manifest_path().c_str(), &now) != 0) {
    // Only a store still being created may lack its manifest.
    if (errno == ENOENT && manifest_stat.st_ino == 0) return;
    throw_io("cannot stat", manifest_path());
  }
  if (same_file_state(now, manifest_stat)) return;
  manifest = parse_manifest(read_file(manifest_path()));
  manifest_stat = now;
}

std::optional<TableMeta> StoreState::table(const std::string& name) {
  std::lock_guard lk(mu);
  refresh_locked();
  auto it = manifest.tables.find(name);
  if (it == manifest.tables.end()) return std::nullopt;
  return it->second;
}

std::shared_ptr<RunFile> StoreState::run_locked(const std::string& id) {
  auto& slot = run_cache[id];
  if (auto r = slot.lock()) return r;
  auto r = RunFile::open(run_path(id));
  slot = r;
  return r;
}

TableSnapshot StoreState::snapshot(const std::string& name) {
  std::lock_guard lk(mu);
  refresh_locked();
  TableSnapshot snap;
  auto it = manifest.tables.find(name);
  if (it == manifest.tables.end()) return snap;
  snap.meta = it->second;
  for (const auto& id : snap.meta.runs) snap.runs.push_back(run_locked(id));
  return snap;
}

void StoreState::update(const std::function<bool(Manifest&)>& f) {
  std::lock_guard lk(mu);
  auto lock_file = dir / "MANIFEST.lock";
  Fd fd(::open(lock_file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644));
  if (!fd) throw_io("cannot open", lock_file);
  while (::flock(fd.get(), LOCK_EX) != 0) {
    if (errno != EINTR) throw_io("cannot lock", lock_file);
  }
  refresh_locked();
  Manifest m = manifest;
  if (!f(m)) return;
  ++m.generation;
  write_file_atomic(manifest_path(), serialize_manifest(m), opts.sync);
  manifest = std::move(m);
  if (::stat(manifest_path().c_str(), &manifest_stat) != 0) throw_io("cannot stat", manifest_path());
}

std::string StoreState::new_run_id() {
  char buf[48];
  std::snprintf(buf, sizeof buf, "r%016llx-%llu", static_cast<unsigned long long>(salt),
                static_cast<unsigned long long>(counter.fetch_add(1)));
  return buf;
}

void fold_into(Pending& acc, std::uint8_t flags, double num, std::string_view text, Combiner c) {
  if (flags & kReset) {
    acc.flags = kReset;
    acc.num = 0;
    acc.text.clear();
  }
  if (!(flags & kHasValue)) return;
  if (c == Combiner::LastWriteWins || !(acc.flags & kHasValue)) {
    acc.flags = static_cast<std::uint8_t>((acc.flags & kReset) | kHasValue | (flags & kTextValue));
    acc.num = num;
    acc.text.assign(text);
  } else if (c == Combiner::Sum) {
    acc.num += num;
  } else {
    acc.text += kConcatDelimiter;
    acc.text += text;
  }
}

}  // namespace detail

// ---- Store ----

Store Store::open(const std::filesystem::path& dir, StoreOptions opts) {
  auto st = std::make_shared<StoreState>();
  st->dir = dir;
  st->opts = opts;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::IoFailure, "cannot create store directory " + dir.string());
  }
  st->store_lock = Fd(::open((dir / "LOCK").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644));
  if (!st->store_lock) throw_io("cannot open", dir / "LOCK");
  bool sole_user = ::flock(st->store_lock.get(), LOCK_EX | LOCK_NB) == 0;

  if (!fs::exists(st->manifest_path())) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".run") bad_manifest("run files present but no manifest in " + dir.string());
    }
    st->update([](Manifest&) { return true; });
  }
  {
    std::lock_guard lk(st->mu);
    st->refresh_locked();
    for (const auto& [name, t] : st->manifest.tables) {
      for (const auto& id : t.runs) {
        try {
          st->run_locked(id);
        } catch (const Error& e) {
          bad_manifest("table " + name + " references unreadable run " + id + ": " + e.what());
        }
      }
    }
  }
  if (sole_user) {
    std::set<std::string> live;
    for (const auto& [name, t] : st->manifest.tables) live.insert(t.runs.begin(), t.runs.end());
    std::vector<fs::path> garbage;
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto& p = e.path();
      if (p.extension() == ".tmp" || (p.extension() == ".run" && !live.count(p.stem().string()))) {
        garbage.push_back(p);
      }
    }
    for (const auto& p : garbage) remove_file(p);
    ::flock(st->store_lock.get(), LOCK_SH);
  } else {
    ::flock(st->store_lock.get(), LOCK_SH);
  }

  std::random_device rd;
  st->salt = (std::uint64_t{rd()} << 32) ^ rd() ^ static_cast<std::uint64_t>(::getpid());
  return Store(std::move(st));
}

const std::filesystem::path& Store::directory() const { return st_->dir; }
const StoreOptions& Store::options() const { return st_->opts; }

TableHandle Store::bind(const std::string& name, Combiner combiner) {
  if (!valid_table_name(name)) throw Error(ErrorCode::InvalidName, "invalid table name '" + name + "'");
  st_->update([&](Manifest& m) {
    if (m.tables.count(name)) return false;
    m.tables[name].combiner = combiner;
    return true;
  });
  return TableHandle(st_, name);
}

bool Store::has_table(const std::string& name) const { return st_->table(name).has_value(); }

std::vector<std::string> Store::tables() const {
  std::lock_guard lk(st_->mu);
  st_->refresh_locked();
  std::vector<std::string> out;
  for (const auto& [name, t] : st_->manifest.tables) out.push_back(name);
  return out;
}

void Store::delete_table(const std::string& name) {
  std::vector<std::string> runs;
  st_->update([&](Manifest& m) {
    auto it = m.tables.find(name);
    if (it == m.tables.end()) return false;
    runs = std::move(it->second.runs);
    m.tables.erase(it);
    return true;
  });
  for (const auto& id : runs) remove_file(st_->run_path(id));
  auto lock = st_->lock_path(name);
  Fd fd(::open(lock.c_str(), O_RDWR | O_CLOEXEC));
  if (fd && ::flock(fd.get(), LOCK_EX | LOCK_NB) == 0) ::unlink(lock.c_str());
}

std::string Store::temp_name(const std::string& tag) {
  for (;;) {
    auto name = "__" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(st_->counter.fetch_add(1));
    if (!has_table(name)) return name;
  }
}

// ---- TableHandle ----

TableHandle::TableHandle(std::shared_ptr<StoreState> st, std::string name)
    : st_(std::move(st)), name_(std::move(name)), buf_(std::make_unique<BufferState>(st_->opts.tracker)) {
  auto meta = st_->table(name_);
  if (meta) buf_->combiner = meta->combiner;
}

TableHandle::~TableHandle() {
  if (!buf_) return;
  try {
    flush();
  } catch (...) {
  }
}

TableHandle::TableHandle(TableHandle&&) noexcept = default;
TableHandle& TableHandle::operator=(TableHandle&& o) noexcept {
  if (this != &o) {
    if (buf_) {
      try {
        flush();
      } catch (...) {
      }
    }
    st_ = std::move(o.st_);
    name_ = std::move(o.name_);
    buf_ = std::move(o.buf_);
  }
  return *this;
}

Store TableHandle::store() const { return Store(st_); }

namespace {

void ensure_lock(StoreState& st, const std::string& name, BufferState& b) {
  if (b.lock) return;
  auto path = st.lock_path(name);
  Fd fd(::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644));
  if (!fd) throw_io("cannot open", path);
  if (::flock(fd.get(), LOCK_EX | LOCK_NB) != 0) {
    if (errno == EWOULDBLOCK) throw Error(ErrorCode::WriterConflict, "table " + name + " has another writer");
    throw_io("cannot lock", path);
  }
  b.lock = std::move(fd);
}

void buffer_write(StoreState& st, const std::string& name, BufferState& b, std::string_view key,
                  std::uint8_t flags, double num, std::string_view text) {
  ensure_lock(st, name, b);
  auto it = b.cells.find(std::string_view(key));
  bool fresh = it == b.cells.end();
  if (fresh) it = b.cells.emplace(std::string(key), Pending{}).first;
  auto before = it->second.text.size();
  fold_into(it->second, flags, num, text, b.combiner);
  b.bytes += (fresh ? key.size() + kCellOverhead : 0) + it->second.text.size() - std::min(before, it->second.text.size());
  b.charge.set(b.bytes);
}

void check_kind(StoreState& st, const std::string& name, BufferState& b, ValueKind k) {
  if (!b.kind) {
    auto meta = st.table(name);
    if (meta && meta->kind) b.kind = meta->kind;
  }
  if (b.kind && *b.kind != k) {
    throw Error(ErrorCode::MixedValueVariant, "table " + name + " holds " +
                                                  (*b.kind == ValueKind::Number ? "numbers" : "texts") +
                                                  "; cannot store a value of the other kind");
  }
  if (b.combiner == Combiner::Sum && k != ValueKind::Number) {
    throw Error(ErrorCode::IncompatibleCollisionRule, "sum table " + name + " needs numeric values");
  }
  if (b.combiner == Combiner::Concat && k != ValueKind::Text) {
    throw Error(ErrorCode::IncompatibleCollisionRule, "concat table " + name + " needs text values");
  }
  b.kind = k;
}

}  // namespace

void TableHandle::put(const Triple& t) {
  check_kind(*st_, name_, *buf_, t.val.kind());
  std::string key = encode_cell(t.row, t.col);
  bool text = t.val.is_text();
  if (t.val.is_empty()) {
    if (buf_->combiner == Combiner::LastWriteWins) buffer_write(*st_, name_, *buf_, key, kReset, 0, {});
  } else {
    std::uint8_t flags = kHasValue | (text ? kTextValue : 0);
    if (buf_->combiner == Combiner::LastWriteWins) flags |= kReset;
    buffer_write(*st_, name_, *buf_, key, flags, text ? 0.0 : t.val.number(),
                 text ? std::string_view(t.val.text()) : std::string_view{});
  }
  if (buf_->bytes >= st_->opts.write_buffer_bytes) flush();
}

IngestReport TableHandle::put(std::span<const Triple> triples) {
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& t : triples) put(t);
  return {triples.size(), seconds_since(t0)};
}

void TableHandle::erase(const Key& row, const Key& col) {
  buffer_write(*st_, name_, *buf_, encode_cell(row, col), kReset, 0, {});
  if (buf_->bytes >= st_->opts.write_buffer_bytes) flush();
}

bool TableHandle::has_pending() const noexcept { return buf_ && !buf_->cells.empty(); }

void TableHandle::flush() {
  auto& b = *buf_;
  if (b.cells.empty()) {
    b.lock.reset();
    return;
  }
  std::vector<EntryView> entries;
  entries.reserve(b.cells.size());
  for (const auto& [key, p] : b.cells) {
    EntryView e;
    e.key = key;
    e.flags = p.flags;
    e.num = p.num;
    e.text = p.text;
    entries.push_back(e);
  }
  std::sort(entries.begin(), entries.end(), [](const EntryView& x, const EntryView& y) { return x.key < y.key; });

  auto id = st_->new_run_id();
  write_run(st_->run_path(id), entries, st_->opts.block_bytes, st_->opts.sync);
  try {
    st_->update([&](Manifest& m) {
      auto& t = m.tables[name_];
      if (t.runs.empty() && !t.kind) t.combiner = b.combiner;
      if (t.kind && b.kind && *t.kind != *b.kind) {
        throw Error(ErrorCode::MixedValueVariant, "table " + name_ + " changed value kind concurrently");
      }
      if (!t.kind) t.kind = b.kind;
      t.runs.push_back(id);
      return true;
    });
  } catch (...) {
    ::unlink(st_->run_path(id).c_str());
    throw;
  }
  b.cells.clear();
  b.bytes = 0;
  b.charge.set(0);
  b.lock.reset();
}

Combiner TableHandle::combiner() const {
  auto meta = st_->table(name_);
  return meta ? meta->combiner : buf_->combiner;
}

std::optional<ValueKind> TableHandle::kind() const {
  auto meta = st_->table(name_);
  if (meta && meta->kind) return meta->kind;
  return buf_->kind;
}

Scanner TableHandle::open_scanner(const IteratorSpec& spec) const {
  if (spec.has_multiply()) {
    throw Error(ErrorCode::InvalidIteratorSpec, "a scan cannot contain a MultiplyJoin; use Store::run_job");
  }
  auto snap = st_->snapshot(name_);
  return Scanner(build_chain(*st_, snap, spec.stages));
}

std::vector<Triple> TableHandle::scan(const IteratorSpec& spec) const {
  auto sc = open_scanner(spec);
  std::vector<Triple> out;
  Triple t;
  while (sc.next(t)) out.push_back(std::move(t));
  return out;
}

PointReader TableHandle::point_reader() const {
  auto snap = st_->snapshot(name_);
  return PointReader(merge_source(snap, st_->opts.tracker, st_->opts.cursor_cache_bytes));
}

std::optional<Value> TableHandle::get(const Key& row, const Key& col) const { return point_reader().get(row, col); }

std::size_t TableHandle::count() const {
  auto snap = st_->snapshot(name_);
  auto src = merge_source(snap, st_->opts.tracker, st_->opts.cursor_cache_bytes);
  std::size_t n = 0;
  for (; src->valid(); src->next()) ++n;
  return n;
}

Assoc TableHandle::to_assoc(const IteratorSpec& spec) const {
  auto triples = scan(spec);
  return Assoc::from_triples(triples, CollisionRule::Last);
}

IngestReport put_assoc(TableHandle& t, const Assoc& a) {
  auto triples = a.to_triples();
  return t.put(triples);
}

// ---- Scanner / PointReader ----

Scanner::Scanner(std::unique_ptr<Source> src) : src_(std::move(src)) {}
Scanner::~Scanner() = default;
Scanner::Scanner(Scanner&&) noexcept = default;
Scanner& Scanner::operator=(Scanner&&) noexcept = default;

bool Scanner::next(Triple& out) {
  if (!src_->valid()) return false;
  out = decode_triple(src_->entry());
  src_->next();
  return true;
}

PointReader::PointReader(std::unique_ptr<Source> src) : src_(std::move(src)) {}
PointReader::~PointReader() = default;
PointReader::PointReader(PointReader&&) noexcept = default;
PointReader& PointReader::operator=(PointReader&&) noexcept = default;

std::optional<Value> PointReader::get(const Key& row, const Key& col) {
  auto key = encode_cell(row, col);
  src_->seek(key);
  if (!src_->valid() || src_->entry().key != key) return std::nullopt;
  return decode_triple(src_->entry()).val;
}

// ---- JobAccess ----

void JobAccess::add(TableHandle& t, std::string_view key, std::uint8_t flags, double num, std::string_view text) {
  buffer_write(*t.st_, t.name_, *t.buf_, key, flags, num, text);
  if (t.buf_->bytes >= t.st_->opts.write_buffer_bytes) t.flush();
}

void JobAccess::prepare_sink(TableHandle& sink, Combiner c, ValueKind kind) {
  sink.st_->update([&](Manifest& m) {
    auto& t = m.tables[sink.name_];
    if (t.runs.empty() && !sink.has_pending()) {
      if (t.combiner == c && t.kind == kind) return false;
      t.combiner = c;
      t.kind = kind;
      return true;
    }
    if (t.combiner != c) {
      throw Error(ErrorCode::IncompatibleCollisionRule,
                  "sink " + sink.name_ + " already uses combiner " + std::string(to_string(t.combiner)));
    }
    return false;
  });
  sink.buf_->combiner = c;
  sink.buf_->kind = kind;
}

}  // namespace d4m::kv
