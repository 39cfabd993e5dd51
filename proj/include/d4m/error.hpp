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

#include <stdexcept>
#include <string>
#include <string_view>

namespace d4m {

enum class ErrorCode {
  MixedValueVariant,
  IncompatibleCollisionRule,
  InvalidKey,
  EmptySelector,
  MalformedRange,
  BadPositional,
  SelfLoop,
  ReservedKeyCollision,
  SchemaMismatch,
  ScaleTooLarge,
  InvalidArgument,
  CorruptManifest,
  CorruptRun,
  IoFailure,
  InvalidName,
  WriterConflict,
  SinkCollision,
  InvalidIteratorSpec,
  BudgetExceeded,
  ParseError,
  MissingTable,
  InvalidCell,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the CLI) can map error classes to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace d4m
