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

#include <atomic>
#include <cstddef>
#include <optional>

namespace d4m {

/// Explicit working-set accounting. Components charge the bytes they hold
/// and release them when done; the tracker keeps the live total and its
/// peak. With a budget set, a charge that would exceed it throws
/// BudgetExceeded.
class MemoryTracker {
 public:
  explicit MemoryTracker(std::optional<std::size_t> budget = std::nullopt) : budget_(budget) {}
  MemoryTracker(const MemoryTracker&) = delete;
  MemoryTracker& operator=(const MemoryTracker&) = delete;

  void charge(std::size_t bytes);
  void release(std::size_t bytes) noexcept;

  std::size_t live() const noexcept { return live_.load(std::memory_order_relaxed); }
  std::size_t peak() const noexcept { return peak_.load(std::memory_order_relaxed); }
  std::optional<std::size_t> budget() const noexcept { return budget_; }
  void reset_peak() noexcept { peak_.store(live(), std::memory_order_relaxed); }

 private:
  std::optional<std::size_t> budget_;
  std::atomic<std::size_t> live_{0};
  std::atomic<std::size_t> peak_{0};
};

/// RAII handle for a charge whose size changes over time. A null tracker
/// turns every call into a no-op.
class TrackedBytes {
 public:
  explicit TrackedBytes(MemoryTracker* tracker = nullptr) : tracker_(tracker) {}
  ~TrackedBytes() { set(0); }
  TrackedBytes(const TrackedBytes&) = delete;
  TrackedBytes& operator=(const TrackedBytes&) = delete;
  TrackedBytes(TrackedBytes&& o) noexcept : tracker_(o.tracker_), bytes_(o.bytes_) { o.bytes_ = 0; }
  TrackedBytes& operator=(TrackedBytes&& o) noexcept {
    if (this != &o) {
      set(0);
      tracker_ = o.tracker_;
      bytes_ = o.bytes_;
      o.bytes_ = 0;
    }
    return *this;
  }

  void set(std::size_t bytes) {
    if (!tracker_) return;
    if (bytes > bytes_) {
      tracker_->charge(bytes - bytes_);
    } else {
      tracker_->release(bytes_ - bytes);
    }
    bytes_ = bytes;
  }
  std::size_t bytes() const noexcept { return bytes_; }

 private:
  MemoryTracker* tracker_;
  std::size_t bytes_ = 0;
};

}  // namespace d4m
