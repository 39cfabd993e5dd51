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

// Crash-point injection for durability testing. Every store I/O step (a
// write chunk of at most kChunkBytes, an fsync, a rename, an unlink)
// counts as one operation; once armed, the process exits immediately with
// kCrashExitCode when the countdown reaches zero, leaving files exactly as
// a kill at that point would.

namespace d4m::kv::fault {

inline constexpr int kCrashExitCode = 86;
inline constexpr std::size_t kChunkBytes = 4096;

void crash_after(std::uint64_t ops);
void disarm();
std::uint64_t io_ops();

}  // namespace d4m::kv::fault
