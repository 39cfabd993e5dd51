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

#include "d4m/error.hpp"

namespace d4m {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MixedValueVariant: return "MixedValueVariant";
    case ErrorCode::IncompatibleCollisionRule: return "IncompatibleCollisionRule";
    case ErrorCode::InvalidKey: return "InvalidKey";
    case ErrorCode::EmptySelector: return "EmptySelector";
    case ErrorCode::MalformedRange: return "MalformedRange";
    case ErrorCode::BadPositional: return "BadPositional";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::ReservedKeyCollision: return "ReservedKeyCollision";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ScaleTooLarge: return "ScaleTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CorruptManifest: return "CorruptManifest";
    case ErrorCode::CorruptRun: return "CorruptRun";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidName: return "InvalidName";
    case ErrorCode::WriterConflict: return "WriterConflict";
    case ErrorCode::SinkCollision: return "SinkCollision";
    case ErrorCode::InvalidIteratorSpec: return "InvalidIteratorSpec";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingTable: return "MissingTable";
    case ErrorCode::InvalidCell: return "InvalidCell";
  }
  return "Unknown";
}

}  // namespace d4m
