// Copyright 2026 The icrkit Authors.
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

namespace icrkit {

// Mirrors icr_status in the C header; values must stay in sync.
enum class ErrorCode {
  kOk = 0,
  kInvalidArgument = 1,
  kConfig = 2,
  kIo = 3,
  kParse = 4,
  kValidation = 5,
  kTransport = 6,
  kNotFound = 7,
  kInternal = 8,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  // Transport failures may succeed when retried; nothing else will.
  bool retryable() const { return code_ == ErrorCode::kTransport; }

 private:
  ErrorCode code_;
};

}  // namespace icrkit
