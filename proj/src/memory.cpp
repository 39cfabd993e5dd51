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

#include "d4m/memory.hpp"

#include <string>

#include "d4m/error.hpp"

namespace d4m {

void MemoryTracker::charge(std::size_t bytes) {
  auto now = live_.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  if (budget_ && now > *budget_) {
    live_.fetch_sub(bytes, std::memory_order_relaxed);
    throw Error(ErrorCode::BudgetExceeded, "working set " + std::to_string(now) + " bytes exceeds budget " +
                                               std::to_string(*budget_));
  }
  auto prev = peak_.load(std::memory_order_relaxed);
  while (now > prev && !peak_.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
  }
}

void MemoryTracker::release(std::size_t bytes) noexcept { live_.fetch_sub(bytes, std::memory_order_relaxed); }

}  // namespace d4m
