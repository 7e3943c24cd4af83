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

// Run manifests: enough provenance to rerun a command and get the same bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace icrkit {

// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string UtcTimestamp();

struct Manifest {
  std::string command;
  std::string started_at = UtcTimestamp();
  std::string config_digest;
  std::vector<std::filesystem::path> inputs;
  std::uint64_t seed = 0;

  // {command, config_digest, input_digests: {path: sha256}, seed, version,
  //  started_at}
  nlohmann::json ToJson() const;
};

void WriteManifest(const std::filesystem::path& path, const Manifest& m);

}  // namespace icrkit
