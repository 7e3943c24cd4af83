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

#include "icrkit/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <istream>
#include <ostream>

#include "icrkit/error.hpp"
#include "icrkit/jsonl.hpp"
#include "icrkit/log.hpp"
#include "icrkit/parallel.hpp"
#include "icrkit/text.hpp"

namespace icrkit::service {

using nlohmann::json;

namespace {

std::string GetString(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) return {};
  if (!it->is_string()) {
    throw Error(ErrorCode::kValidation, std::string("'") + key + "' must be a string");
  }
  return it->get<std::string>();
}

json RequestIdOf(const json& j) {
  if (!j.is_object()) return nullptr;
  if (auto it = j.find("request_id"); it != j.end() && it->is_string()) return *it;
  if (!j.contains("request_id")) {
    if (auto it = j.find("id"); it != j.end() && it->is_string()) return *it;
  }
  return nullptr;
}

// Bounded; Push blocks while full.
class LineQueue {
 public:
  explicit LineQueue(size_t capacity) : capacity_(capacity) {}

  void Push(size_t line_number, std::string line) {
    std::unique_lock<std::mutex> lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.emplace_back(line_number, std::move(line));
    not_empty_.notify_one();
  }

  bool Pop(std::pair<size_t, std::string>& out) {
    std::unique_lock<std::mutex> lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return false;
    out = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return true;
  }

  void Close() {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<std::pair<size_t, std::string>> items_;
  size_t capacity_;
  bool closed_ = false;
};

class FdLineReader {
 public:
  explicit FdLineReader(int fd) : fd_(fd) {}

  bool Next(std::string& line) {
    for (;;) {
      const size_t nl = buffer_.find('\n', scan_);
      if (nl != std::string::npos) {
        line.assign(buffer_, 0, nl);
        buffer_.erase(0, nl + 1);
        scan_ = 0;
        return true;
      }
      scan_ = buffer_.size();
      if (eof_) {
        if (buffer_.empty()) return false;
        line = std::move(buffer_);
        buffer_.clear();
        scan_ = 0;
        return true;
      }
      char chunk[65536];
      const ssize_t n = ::read(fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        eof_ = true;
      } else if (n == 0) {
        eof_ = true;
      } else {
        buffer_.append(chunk, static_cast<size_t>(n));
      }
    }
  }

 private:
  int fd_;
  std::string buffer_;
  size_t scan_ = 0;
  bool eof_ = false;
};

bool WriteAll(int fd, const std::string& data) {
  size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      const ssize_t w = ::write(fd, data.data() + off, data.size() - off);
      if (w < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      off += static_cast<size_t>(w);
      continue;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<size_t>(n);
  }
  return true;
}

}  // namespace

RewardRequest RequestFromJson(const json& j,
                              std::optional<rewards::RewardKind> default_kind) {
  if (!j.is_object()) throw Error(ErrorCode::kValidation, "request must be a JSON object");
  RewardRequest r;
  const bool shorthand = !j.contains("request_id") && j.contains("id");
  if (shorthand) {
    r.request_id = GetString(j, "id");
    r.instance_id = r.request_id;
  } else {
    r.request_id = GetString(j, "request_id");
  }
  if (r.request_id.empty()) throw Error(ErrorCode::kValidation, "missing request_id");

  const bool has_inline = j.contains("instance");
  const bool has_ref = j.contains("instance_id");
  if (has_inline && has_ref) {
    throw Error(ErrorCode::kValidation, "give either 'instance' or 'instance_id', not both");
  }
  if (has_inline) {
    r.instance = corpus::InstanceFromJson(j.at("instance"));
    r.instance_id.clear();
  } else if (has_ref) {
    r.instance_id = GetString(j, "instance_id");
  }
  if (!r.instance && r.instance_id.empty()) {
    throw Error(ErrorCode::kValidation, "missing 'instance' or 'instance_id'");
  }

  if (j.contains("output_text")) {
    r.output_text = GetString(j, "output_text");
  } else if (j.contains("output")) {
    r.output_text = GetString(j, "output");
  } else {
    throw Error(ErrorCode::kValidation, "missing output_text");
  }

  if (j.contains("kind")) {
    const std::string k = GetString(j, "kind");
    const auto kind = rewards::ParseRewardKind(k);
    if (!kind) throw Error(ErrorCode::kValidation, "unknown reward kind '" + k + "'");
    r.kind = *kind;
  } else if (default_kind) {
    r.kind = *default_kind;
  } else {
    throw Error(ErrorCode::kValidation, "missing kind");
  }
  return r;
}

std::vector<corpus::ContextInstance> LoadInstances(
    const std::vector<std::filesystem::path>& paths) {
  std::vector<corpus::ContextInstance> out;
  std::set<std::string> ids;
  for (const auto& path : paths) {
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::kIo, "instance file not found: " + path.string());
    }
    const auto errors = jsonl::ForEach(path, [&](const json& j, size_t) {
      auto inst = corpus::InstanceFromJson(j);
      if (!ids.insert(inst.id).second) {
        throw Error(ErrorCode::kValidation, "duplicate instance id '" + inst.id + "'");
      }
      out.push_back(std::move(inst));
    });
    if (!errors.empty()) {
      throw Error(ErrorCode::kValidation, path.string() + ":" +
                                              std::to_string(errors.front().line) +
                                              ": " + errors.front().message);
    }
  }
  return out;
}

RewardService::RewardService(std::vector<corpus::ContextInstance> instances,
                             rewards::RewardOptions options,
                             std::shared_ptr<judge::JudgeClient> judge,
                             std::optional<rewards::RewardKind> default_kind)
    : options_(std::move(options)),
      judge_(std::move(judge)),
      default_kind_(default_kind) {
  for (auto& inst : instances) {
    const std::string id = inst.id;
    if (!instances_.emplace(id, std::move(inst)).second) {
      throw Error(ErrorCode::kValidation, "duplicate instance id '" + id + "'");
    }
  }
}

rewards::RewardResult RewardService::Score(const RewardRequest& request) const {
  const corpus::ContextInstance* inst = nullptr;
  if (request.instance) {
    inst = &*request.instance;
  } else {
    const auto it = instances_.find(request.instance_id);
    if (it == instances_.end()) {
      throw Error(ErrorCode::kNotFound, "unknown instance_id '" + request.instance_id + "'");
    }
    inst = &it->second;
  }
  return rewards::ComputeReward(*inst, request.output_text, request.kind, judge_.get(),
                                options_);
}

json RewardService::HandleRequest(const json& request, size_t line_number) const {
  const json id = RequestIdOf(request);
  try {
    const auto req = RequestFromJson(request, default_kind_);
    json response = rewards::ToJson(Score(req));
    response["request_id"] = req.request_id;
    return response;
  } catch (const Error& e) {
    return ErrorResponse(id, e.code(), e.what(), line_number);
  } catch (const json::exception& e) {
    return ErrorResponse(id, ErrorCode::kValidation, e.what(), line_number);
  } catch (const std::exception& e) {
    return ErrorResponse(id, ErrorCode::kInternal, e.what(), line_number);
  }
}

json RewardService::HandleLine(std::string_view line, size_t line_number) const {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::exception& e) {
    return ErrorResponse(nullptr, ErrorCode::kParse,
                         std::string("malformed JSON: ") + e.what(), line_number);
  }
  return HandleRequest(request, line_number);
}

bool IsErrorResponse(const json& response) { return response.contains("error"); }

json ErrorResponse(const json& request_id, ErrorCode code, const std::string& message,
                   size_t line_number) {
  return {{"request_id", request_id},
          {"error",
           {{"code", ErrorCodeName(code)},
            {"message", message},
            {"line", line_number},
            {"retryable", code == ErrorCode::kTransport}}}};
}

ServeStats Serve(const RewardService& svc,
                 const std::function<bool(std::string&)>& next_line,
                 const std::function<void(const std::string&)>& write_line,
                 size_t workers) {
  workers = std::max<size_t>(1, workers);
  LineQueue queue(workers * 4);
  std::mutex out_mu;
  ServeStats stats;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      std::pair<size_t, std::string> item;
      while (queue.Pop(item)) {
        const json response = svc.HandleLine(item.second, item.first);
        const std::string out = jsonl::Dump(response);
        std::lock_guard<std::mutex> lock(out_mu);
        ++stats.requests;
        if (IsErrorResponse(response)) ++stats.errors;
        try {
          write_line(out);
        } catch (const std::exception& e) {
          log::Error(std::string("response write failed: ") + e.what());
        }
      }
    });
  }
  std::string line;
  size_t number = 0;
  try {
    while (next_line(line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::Trim(line).empty()) continue;
      queue.Push(number, std::move(line));
      line.clear();
    }
  } catch (...) {
    queue.Close();
    for (auto& t : pool) t.join();
    throw;
  }
  queue.Close();
  for (auto& t : pool) t.join();
  return stats;
}

ServeStats ServeStream(const RewardService& svc, std::istream& in, std::ostream& out,
                       size_t workers) {
  return Serve(
      svc, [&](std::string& line) { return static_cast<bool>(std::getline(in, line)); },
      [&](const std::string& s) {
        out << s << '\n';
        out.flush();
      },
      workers);
}

ServeStats ServeFd(const RewardService& svc, int in_fd, int out_fd, size_t workers) {
  FdLineReader reader(in_fd);
  return Serve(
      svc, [&](std::string& line) { return reader.Next(line); },
      [&](const std::string& s) {
        if (!WriteAll(out_fd, s + "\n")) {
          throw Error(ErrorCode::kIo, std::string("write failed: ") + std::strerror(errno));
        }
      },
      workers);
}

TcpServer::TcpServer(const RewardService& svc, size_t workers)
    : svc_(svc), workers_(workers) {}

TcpServer::~TcpServer() {
  Stop();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::uint16_t TcpServer::Listen(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port_str.c_str(),
                               &hints, &res);
  if (rc != 0) {
    throw Error(ErrorCode::kConfig, "cannot resolve '" + host + "': " + gai_strerror(rc));
  }
  std::string last_error = "no address";
  for (addrinfo* a = res; a != nullptr; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) {
    throw Error(ErrorCode::kConfig, "cannot listen on " + host + ":" + port_str + ": " +
                                        last_error);
  }
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET6) {
    return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
  return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

void TcpServer::Run() {
  if (listen_fd_ < 0) throw Error(ErrorCode::kConfig, "Listen() was not called");
  while (!stop_.load()) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready <= 0) continue;
    const int conn = ::accept(listen_fd_, nullptr, nullptr);
    if (conn < 0) continue;
    std::lock_guard<std::mutex> lock(mu_);
    if (stop_.load()) {
      ::close(conn);
      break;
    }
    connections_.push_back(conn);
    threads_.emplace_back([this, conn] {
      try {
        const auto stats = ServeFd(svc_, conn, conn, workers_);
        log::Info("connection closed after " + std::to_string(stats.requests) +
                  " requests");
      } catch (const std::exception& e) {
        log::Warning(std::string("connection failed: ") + e.what());
      }
      std::lock_guard<std::mutex> inner(mu_);
      ::close(conn);
      std::erase(connections_, conn);
    });
  }
  std::vector<std::thread> threads;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (int fd : connections_) ::shutdown(fd, SHUT_RD);
    threads.swap(threads_);
  }
  for (auto& t : threads) t.join();
}

void TcpServer::Stop() { stop_.store(true); }

json BatchSummary::ToJson() const {
  json kinds = json::object();
  for (const auto& [kind, acc] : totals) {
    kinds[kind] = {{"count", acc.second},
                   {"mean_total", acc.second == 0 ? 0.0 : acc.first / acc.second}};
  }
  return {{"requests", requests}, {"errors", errors}, {"kinds", kinds}};
}

BatchSummary RunBatch(const RewardService& svc, const BatchOptions& opts) {
  const std::string data = jsonl::ReadFile(opts.requests);
  std::vector<std::pair<size_t, std::string>> lines;
  size_t number = 0;
  for (const auto line : text::SplitLines(data)) {
    ++number;
    if (text::Trim(line).empty()) continue;
    lines.emplace_back(number, std::string(line));
  }

  if (!svc.has_judge()) {
    for (const auto& [n, line] : lines) {
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) continue;
      std::optional<rewards::RewardKind> kind = svc.default_kind();
      if (auto it = j.find("kind"); it != j.end() && it->is_string()) {
        kind = rewards::ParseRewardKind(it->get<std::string>());
      }
      if (kind == rewards::RewardKind::kRJudge) {
        throw Error(ErrorCode::kConfig, "line " + std::to_string(n) +
                                            " requests R_JUDGE but no judge is configured");
      }
    }
  }

  std::vector<json> responses(lines.size());
  ParallelFor(lines.size(), opts.workers, [&](size_t i) {
    responses[i] = svc.HandleLine(lines[i].second, lines[i].first);
  });

  BatchSummary summary;
  std::string out;
  for (const auto& r : responses) {
    ++summary.requests;
    if (IsErrorResponse(r)) {
      ++summary.errors;
    } else {
      auto& acc = summary.totals[r.at("kind").get<std::string>()];
      acc.first += r.at("total").get<double>();
      ++acc.second;
    }
    out += jsonl::Dump(r);
    out += '\n';
  }
  jsonl::WriteFile(opts.output, out);
  return summary;
}

}  // namespace icrkit::service
