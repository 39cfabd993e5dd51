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

#include <sys/stat.h>

#include <algorithm>
#include <cstring>

#include "d4m/error.hpp"
#include "d4m/kv/encoding.hpp"
#include "kv/run.hpp"

namespace d4m::kv::detail {

namespace {

constexpr std::string_view kHeadMagic = "D4MRUN01";
constexpr std::string_view kTailMagic = "D4MEND01";
constexpr std::size_t kFooterBytes = 32;

[[noreturn]] void corrupt(const fs::path& p, const std::string& what) {
  throw Error(ErrorCode::CorruptRun, p.string() + ": " + what);
}

void frame(std::string& out, std::string_view payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  put_u32(out, crc32(payload));
  out.append(payload);
}

}  // namespace

std::shared_ptr<RunFile> RunFile::open(const fs::path& path) {
  auto run = std::make_shared<RunFile>();
  run->path_ = path;
  run->fd_ = open_read(path);
  struct stat st{};
  if (::fstat(run->fd_.get(), &st) != 0) throw_io("cannot stat", path);
  auto size = static_cast<std::uint64_t>(st.st_size);
  if (size < kHeadMagic.size() + kFooterBytes) corrupt(path, "file too short");

  std::string buf;
  pread_all(run->fd_.get(), buf, 0, kHeadMagic.size(), path);
  if (buf != kHeadMagic) corrupt(path, "bad header magic");
  pread_all(run->fd_.get(), buf, size - kFooterBytes, kFooterBytes, path);
  if (std::string_view(buf).substr(24) != kTailMagic) corrupt(path, "bad footer magic");
  if (crc32(std::string_view(buf).substr(0, 16)) != get_u32(buf.data() + 16)) corrupt(path, "footer checksum");
  auto index_off = get_u64(buf.data());
  run->entries_ = get_u64(buf.data() + 8);
  if (index_off < kHeadMagic.size() || index_off + 8 > size - kFooterBytes) corrupt(path, "bad index offset");

  pread_all(run->fd_.get(), buf, index_off, 8, path);
  auto len = get_u32(buf.data());
  auto crc = get_u32(buf.data() + 4);
  if (index_off + 8 + len != size - kFooterBytes) corrupt(path, "bad index length");
  pread_all(run->fd_.get(), buf, index_off + 8, len, path);
  if (crc32(buf) != crc) corrupt(path, "index checksum");

  std::string_view in(buf);
  std::uint64_t blocks = 0;
  if (!get_varint(in, blocks)) corrupt(path, "truncated index");
  for (std::uint64_t b = 0; b < blocks; ++b) {
    std::uint64_t klen = 0, off = 0, blen = 0;
    if (!get_varint(in, klen) || in.size() < klen) corrupt(path, "truncated index");
    run->first_keys_.emplace_back(in.substr(0, klen));
    in.remove_prefix(klen);
    if (!get_varint(in, off) || !get_varint(in, blen)) corrupt(path, "truncated index");
    if (off + 8 + blen > index_off) corrupt(path, "block outside data region");
    run->offsets_.push_back(off);
    run->lengths_.push_back(static_cast<std::uint32_t>(blen));
  }
  if (!in.empty()) corrupt(path, "trailing index bytes");
  return run;
}

std::string_view RunFile::read_block(std::size_t b, std::string& buf) const {
  pread_all(fd_.get(), buf, offsets_[b], lengths_[b] + 8, path_);
  if (get_u32(buf.data()) != lengths_[b]) corrupt(path_, "block length mismatch");
  std::string_view payload = std::string_view(buf).substr(8);
  if (crc32(payload) != get_u32(buf.data() + 4)) corrupt(path_, "block checksum");
  return payload;
}

void decode_block(std::string_view in, std::vector<EntryView>& out, const fs::path& p) {
  out.clear();
  std::uint64_t n = 0;
  if (!get_varint(in, n)) corrupt(p, "truncated block");
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    EntryView e;
    std::uint64_t klen = 0;
    if (!get_varint(in, klen) || in.size() < klen + 1) corrupt(p, "truncated entry");
    e.key = in.substr(0, klen);
    in.remove_prefix(klen);
    e.row_len = static_cast<std::uint32_t>(encoded_key_length(e.key));
    e.flags = static_cast<std::uint8_t>(in.front());
    in.remove_prefix(1);
    if (e.has_value()) {
      if (e.is_text()) {
        std::uint64_t tlen = 0;
        if (!get_varint(in, tlen) || in.size() < tlen) corrupt(p, "truncated text value");
        e.text = in.substr(0, tlen);
        in.remove_prefix(tlen);
      } else {
        if (in.size() < 8) corrupt(p, "truncated numeric value");
        std::memcpy(&e.num, in.data(), 8);
        in.remove_prefix(8);
      }
    }
    out.push_back(e);
  }
  if (!in.empty()) corrupt(p, "trailing block bytes");
}

void write_run(const fs::path& path, const std::vector<EntryView>& entries, std::size_t block_bytes,
               bool sync) {
  std::string file(kHeadMagic);
  std::string index, payload, body;
  std::size_t in_block = 0, blocks = 0;
  std::string first;

  auto close_block = [&] {
    if (in_block == 0) return;
    payload.clear();
    put_varint(payload, in_block);
    payload += body;
    auto off = file.size();
    frame(file, payload);
    put_varint(index, first.size());
    index += first;
    put_varint(index, off);
    put_varint(index, payload.size());
    ++blocks;
    body.clear();
    in_block = 0;
  };

  for (const auto& e : entries) {
    if (in_block == 0) first = e.key;
    put_varint(body, e.key.size());
    body += e.key;
    body.push_back(static_cast<char>(e.flags));
    if (e.flags & kHasValue) {
      if (e.flags & kTextValue) {
        put_varint(body, e.text.size());
        body += e.text;
      } else {
        char raw[8];
        std::memcpy(raw, &e.num, 8);
        body.append(raw, 8);
      }
    }
    ++in_block;
    if (body.size() >= block_bytes) close_block();
  }
  close_block();

  std::string index_payload;
  put_varint(index_payload, blocks);
  index_payload += index;
  auto index_off = file.size();
  frame(file, index_payload);
  std::string footer;
  put_u64(footer, index_off);
  put_u64(footer, entries.size());
  put_u32(footer, crc32(footer));
  put_u32(footer, 0);
  footer += kTailMagic;
  file += footer;

  auto tmp = path;
  tmp += ".tmp";
  {
    auto fd = open_write_new(tmp);
    write_all(fd.get(), file, tmp);
    if (sync) sync_fd(fd.get(), tmp);
  }
  rename_file(tmp, path);
  if (sync) sync_dir(path.parent_path());
}

RunCursor::RunCursor(std::shared_ptr<const RunFile> run, MemoryTracker* tracker, std::size_t cache_bytes)
    : run_(std::move(run)), seen_(run_->block_count(), false), cache_cap_(cache_bytes), charge_(tracker) {
  if (run_->block_count() > 0) load(0);
}

void RunCursor::load(std::size_t block) {
  block_ = block;
  pos_ = 0;
  if (auto it = cache_.find(block); it != cache_.end()) {
    cur_ = it->second;
    lru_.remove(block);
    lru_.push_front(block);
    return;
  }
  if (seen_[block] && !caching_ && cache_cap_ > 0) caching_ = true;
  seen_[block] = true;
  auto b = (cur_ && cur_.use_count() == 1 && !caching_) ? cur_ : std::make_shared<Block>();
  auto payload = run_->read_block(block, b->buf);
  decode_block(payload, b->entries, run_->path());
  b->bytes = b->buf.capacity() + b->entries.capacity() * sizeof(EntryView);
  cur_ = b;
  if (caching_) {
    cache_[block] = b;
    lru_.push_front(block);
    cached_bytes_ += b->bytes;
    while (cached_bytes_ > cache_cap_ && lru_.size() > 1) {
      auto victim = lru_.back();
      lru_.pop_back();
      cached_bytes_ -= cache_[victim]->bytes;
      cache_.erase(victim);
    }
    charge_.set(cached_bytes_ + b->bytes);
  } else {
    charge_.set(b->bytes);
  }
}

void RunCursor::next() {
  if (++pos_ < cur_->entries.size()) return;
  if (block_ + 1 < run_->block_count()) load(block_ + 1);
}

void RunCursor::seek(std::string_view target) {
  auto nblocks = run_->block_count();
  if (nblocks == 0) return;
  // Last block whose first key <= target.
  std::size_t lo = 0, hi = nblocks;
  while (hi - lo > 1) {
    auto mid = (lo + hi) / 2;
    if (std::string_view(run_->first_key(mid)) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (lo != block_) load(lo);
  const auto& es = cur_->entries;
  auto it = std::lower_bound(es.begin(), es.end(), target,
                             [](const EntryView& e, std::string_view t) { return e.key < t; });
  pos_ = static_cast<std::size_t>(it - es.begin());
  if (pos_ == es.size() && block_ + 1 < nblocks) load(block_ + 1);
}

}  // namespace d4m::kv::detail
