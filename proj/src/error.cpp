// Copyright 2026 The btsimp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "btsimp/error.hpp"

namespace btsimp {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::io: return "IoError";
    case ErrorCode::encoding: return "EncodingError";
    case ErrorCode::parse: return "ParseError";
    case ErrorCode::range: return "RangeError";
    case ErrorCode::empty_line: return "EmptyLine";
    case ErrorCode::empty_corpus: return "EmptyCorpus";
    case ErrorCode::degenerate_input: return "DegenerateInput";
    case ErrorCode::shape: return "ShapeError";
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::unknown_token: return "UnknownToken";
    case ErrorCode::numeric: return "NumericError";
    case ErrorCode::checkpoint: return "CheckpointError";
    case ErrorCode::no_records: return "NoRecords";
  }
  return "Error";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

}  // namespace btsimp
