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

#include "icrkit/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "icrkit/error.hpp"
#include "icrkit/text.hpp"

namespace icrkit::jsonl {

std::vector<LineError> ForEach(
    const std::filesystem::path& path,
    const std::function<void(const nlohmann::json&, size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<LineError> errors;
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (text::Trim(line).empty()) continue;
    try {
      fn(nlohmann::json::parse(line), number);
    } catch (const std::exception& e) {
      errors.push_back({number, e.what()});
    }
  }
  return errors;
}

std::string Dump(const nlohmann::json& j) {
  // nlohmann::json objects are std::map backed, so keys come out sorted.
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void Write(const std::filesystem::path& path,
           const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += Dump(r);
    out += '\n';
  }
  WriteFile(path, out);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& data) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << data;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace icrkit::jsonl
