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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace btsimp {

enum class ErrorCode {
  invalid_argument,
  io,
  encoding,
  parse,
  range,
  empty_line,
  empty_corpus,
  degenerate_input,
  shape,
  config,
  unknown_token,
  numeric,
  checkpoint,
  no_records,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above; the C
// API maps them onto bts_status values one-to-one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace btsimp
