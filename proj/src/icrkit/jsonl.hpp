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

// JSON-lines reading and writing.

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace icrkit::jsonl {

struct LineError {
  size_t line = 0;  // 1-based
  std::string message;
};

// Calls fn(json, line_number) for every non-blank line. Lines that fail to
// parse, or for which fn throws, are recorded and skipped.
std::vector<LineError> ForEach(
    const std::filesystem::path& path,
    const std::function<void(const nlohmann::json&, size_t)>& fn);

// Serializes with sorted keys and no whitespace, one object per line.
std::string Dump(const nlohmann::json& j);
void Write(const std::filesystem::path& path,
           const std::vector<nlohmann::json>& rows);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& data);

}  // namespace icrkit::jsonl
