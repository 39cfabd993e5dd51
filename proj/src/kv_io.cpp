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
#include <unistd.h>
#include <zlib.h>

#include <atomic>
#include <cerrno>

#include "d4m/error.hpp"
#include "d4m/kv/fault.hpp"
#include "kv/io.hpp"

namespace d4m::kv {

namespace {

std::atomic<std::uint64_t> g_ops{0};
std::atomic<std::uint64_t> g_crash_at{0};  // 0 = disarmed

}  // namespace

namespace fault {

void crash_after(std::uint64_t ops) { g_crash_at.store(g_ops.load() + ops + 1); }
void disarm() { g_crash_at.store(0); }
std::uint64_t io_ops() { return g_ops.load(); }

}  // namespace fault

namespace detail {

std::uint32_t crc32(std::string_view bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    auto n = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    c = ::crc32(c, p, n);
    p += n;
    left -= n;
  }
  return static_cast<std::uint32_t>(c);
}

void fault_tick() {
  auto n = g_ops.fetch_add(1) + 1;
  auto at = g_crash_at.load();
  if (at != 0 && n >= at) ::_exit(fault::kCrashExitCode);
}

Fd::~Fd() { reset(); }

Fd& Fd::operator=(Fd&& o) noexcept {
  if (this != &o) {
    reset();
    fd_ = o.fd_;
    o.fd_ = -1;
  }
  return *this;
}

void Fd::reset() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void throw_io(const std::string& what, const fs::path& p) {
  throw Error(ErrorCode::IoFailure, what + " " + p.string() + ": " + std::strerror(errno));
}

Fd open_read(const fs::path& p) {
  int fd = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) throw_io("cannot open", p);
  return Fd(fd);
}

Fd open_write_new(const fs::path& p) {
  int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw_io("cannot create", p);
  return Fd(fd);
}

void write_all(int fd, std::string_view data, const fs::path& p) {
  while (!data.empty()) {
    fault_tick();
    auto n = std::min(data.size(), fault::kChunkBytes);
    auto w = ::write(fd, data.data(), n);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw_io("write failed on", p);
    }
    data.remove_prefix(static_cast<std::size_t>(w));
  }
}

void sync_fd(int fd, const fs::path& p) {
  fault_tick();
  if (::fsync(fd) != 0) throw_io("fsync failed on", p);
}

void sync_dir(const fs::path& dir) {
  fault_tick();
  Fd fd(::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC));
  if (!fd) throw_io("cannot open directory", dir);
  if (::fsync(fd.get()) != 0) throw_io("fsync failed on", dir);
}

void rename_file(const fs::path& from, const fs::path& to) {
  fault_tick();
  if (::rename(from.c_str(), to.c_str()) != 0) throw_io("rename failed for", from);
}

void remove_file(const fs::path& p) {
  fault_tick();
  if (::unlink(p.c_str()) != 0 && errno != ENOENT) throw_io("unlink failed for", p);
}

std::string read_file(const fs::path& p) {
  auto fd = open_read(p);
  std::string out;
  char buf[65536];
  for (;;) {
    auto n = ::read(fd.get(), buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_io("read failed on", p);
    }
    if (n == 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

void pread_all(int fd, std::string& out, std::uint64_t offset, std::size_t len, const fs::path& p) {
  out.resize(len);
  std::size_t got = 0;
  while (got < len) {
    auto n = ::pread(fd, out.data() + got, len - got, static_cast<off_t>(offset + got));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_io("read failed on", p);
    }
    if (n == 0) throw Error(ErrorCode::CorruptRun, "unexpected end of file in " + p.string());
    got += static_cast<std::size_t>(n);
  }
}

void write_file_atomic(const fs::path& target, std::string_view contents, bool sync) {
  auto tmp = target;
  tmp += ".tmp";
  {
    auto fd = open_write_new(tmp);
    write_all(fd.get(), contents, tmp);
    if (sync) sync_fd(fd.get(), tmp);
  }
  rename_file(tmp, target);
  if (sync) sync_dir(target.parent_path());
}

}  // namespace detail
}  // namespace d4m::kv
