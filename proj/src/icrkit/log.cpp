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

#include "icrkit/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace icrkit::log {

namespace {

Level InitialThreshold() {
  const char* v = std::getenv("ICRKIT_LOG_LEVEL");
  const std::string s = v ? v : "";
  if (s == "debug") return Level::kDebug;
  if (s == "info") return Level::kInfo;
  if (s == "error") return Level::kError;
  return Level::kWarning;
}

std::atomic<int> g_threshold{static_cast<int>(InitialThreshold())};
std::mutex g_mu;
Sink g_sink;

std::string_view LevelName(Level l) {
  switch (l) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarning: return "warning";
    case Level::kError: return "error";
  }
  return "info";
}

}  // namespace

void SetThreshold(Level level) { g_threshold = static_cast<int>(level); }
Level Threshold() { return static_cast<Level>(g_threshold.load()); }

void SetSink(Sink sink) {
  std::lock_guard<std::mutex> lock(g_mu);
  g_sink = std::move(sink);
}

void Write(Level level, std::string_view message) {
  if (static_cast<int>(level) < g_threshold.load()) return;
  std::lock_guard<std::mutex> lock(g_mu);
  if (g_sink) {
    g_sink(level, message);
    return;
  }
  std::cerr << "icrkit " << LevelName(level) << ": " << message << '\n';
}

}  // namespace icrkit::log
