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

#include "icrkit/manifest.hpp"

#include <chrono>
#include <ctime>

#include "icrkit/digest.hpp"
#include "icrkit/jsonl.hpp"

namespace icrkit {

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json Manifest::ToJson() const {
  nlohmann::json digests = nlohmann::json::object();
  for (const auto& p : inputs) {
    if (!p.empty()) digests[p.string()] = Sha256File(p);
  }
  return {{"command", command},
          {"config_digest", config_digest},
          {"input_digests", digests},
          {"seed", seed},
          {"version", ICRKIT_VERSION},
          {"started_at", started_at}};
}

void WriteManifest(const std::filesystem::path& path, const Manifest& m) {
  jsonl::WriteFile(path, m.ToJson().dump(2) + "\n");
}

}  // namespace icrkit
