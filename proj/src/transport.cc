//
// Copyright 2026 The nlefaith Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "nlefaith/transport.h"

#include <errno.h>
#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <istream>
#include <ostream>

#include "httplib.h"
#include "nlefaith/error.h"

extern char** environ;

namespace nlefaith {

void InflightLimit::Acquire() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] { return available_ > 0; });
  --available_;
}

void InflightLimit::Release() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++available_;
  }
  cv_.notify_one();
}

namespace {

class InflightSlot {
 public:
  explicit InflightSlot(InflightLimit& limit) : limit_(limit) {
    limit_.Acquire();
  }
  ~InflightSlot() { limit_.Release(); }

 private:
  InflightLimit& limit_;
};

std::string ErrnoText(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

void IgnoreSigpipe() {
  static const bool done = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

bool WriteAll(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
  return true;
}

std::string RawExcerpt(std::string_view body) {
  constexpr size_t kMax = 120;
  std::string out(body.substr(0, kMax));
  if (body.size() > kMax) out += "...";
  return "'" + out + "'";
}

Json ParseReply(std::string_view body) {
  Json reply;
  try {
    reply = Json::parse(body);
  } catch (const Json::exception&) {
    throw ConformanceError("reply is not valid JSON: " + RawExcerpt(body));
  }
  if (!reply.is_object()) {
    throw ConformanceError("reply is not a JSON object: " + RawExcerpt(body));
  }
  return reply;
}

}  // namespace

StdioTransport::StdioTransport(std::vector<std::string> argv, double timeout_s,
                               int max_parallel)
    : argv_(std::move(argv)), timeout_s_(timeout_s), limit_(max_parallel) {
  if (argv_.empty()) throw UsageError("subprocess command is empty");
  IgnoreSigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw TransportError(ErrnoText("pipe"));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw TransportError(ErrnoText("pipe"));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);
  int rc = ::posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(),
                          environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    pid_ = -1;
    throw TransportError("cannot start '" + argv_[0] + "': " +
                         std::strerror(rc));
  }
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  reader_ = std::thread([this] { ReadLoop(); });
}

StdioTransport::~StdioTransport() {
  if (to_child_ >= 0) ::close(to_child_);
  if (pid_ > 0) {
    int status = 0;
    bool reaped = false;
    for (int i = 0; i < 200 && !reaped; ++i) {
      pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || r < 0) {
        reaped = true;
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
    }
    if (!reaped) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }
  if (reader_.joinable()) reader_.join();
  if (from_child_ >= 0) ::close(from_child_);
}

void StdioTransport::FailAll(const std::string& message, bool conformance) {
  std::lock_guard<std::mutex> lock(mu_);
  if (!dead_) {
    dead_ = true;
    dead_conformance_ = conformance;
    dead_reason_ = message;
  }
  for (auto& [id, promise] : pending_) {
    promise.set_exception(std::make_exception_ptr(
        conformance ? ConformanceError(message) : TransportError(message)));
  }
  pending_.clear();
}

void StdioTransport::ReadLoop() {
  std::string buffer;
  char chunk[65536];
  while (true) {
    ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<size_t>(n));
    size_t start = 0;
    size_t nl;
    while ((nl = buffer.find('\n', start)) != std::string::npos) {
      std::string_view line(buffer.data() + start, nl - start);
      start = nl + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
      Json reply;
      try {
        reply = ParseReply(line);
      } catch (const Error& e) {
        FailAll(std::string(e.what()) + " (from '" + argv_[0] + "')", true);
        continue;
      }
      if (!reply.contains("id") || !reply["id"].is_string()) {
        FailAll("reply without a string id from '" + argv_[0] + "'", true);
        continue;
      }
      std::lock_guard<std::mutex> lock(mu_);
      auto it = pending_.find(reply["id"].get<std::string>());
      if (it != pending_.end()) {
        it->second.set_value(std::move(reply));
        pending_.erase(it);
      }
    }
    buffer.erase(0, start);
  }
  FailAll("model process '" + argv_[0] + "' closed its output", false);
}

Json StdioTransport::Call(const Json& request) {
  InflightSlot slot(limit_);
  const std::string id = request.at("id").get<std::string>();
  std::future<Json> reply;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (dead_) {
      throw dead_conformance_ ? ConformanceError(dead_reason_)
                              : TransportError(dead_reason_);
    }
    std::promise<Json> promise;
    reply = promise.get_future();
    pending_[id] = std::move(promise);
  }
  std::string line =
      request.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n";
  bool ok;
  {
    std::lock_guard<std::mutex> lock(write_mu_);
    ok = WriteAll(to_child_, line);
  }
  if (!ok) {
    std::string message = ErrnoText("write to '" + argv_[0] + "'");
    std::lock_guard<std::mutex> lock(mu_);
    pending_.erase(id);
    throw TransportError(message);
  }
  auto timeout = std::chrono::duration<double>(timeout_s_);
  if (reply.wait_for(timeout) != std::future_status::ready) {
    std::lock_guard<std::mutex> lock(mu_);
    pending_.erase(id);
    throw TransportError("request " + id + " timed out after " +
                         std::to_string(timeout_s_) + "s");
  }
  return reply.get();
}

HttpTransport::HttpTransport(std::string url, double timeout_s,
                             int max_parallel)
    : url_(std::move(url)), timeout_s_(timeout_s), limit_(max_parallel) {
  while (!url_.empty() && url_.back() == '/') url_.pop_back();
  if (url_.rfind("http://", 0) != 0) {
    throw UsageError("endpoint url must start with http://: " + url_);
  }
}

Json HttpTransport::Call(const Json& request) {
  InflightSlot slot(limit_);
  httplib::Client client(url_);
  auto usec = std::chrono::microseconds(
      static_cast<int64_t>(timeout_s_ * 1e6));
  client.set_connection_timeout(usec);
  client.set_read_timeout(usec);
  client.set_write_timeout(usec);
  auto res = client.Post(
      "/infer", request.dump(-1, ' ', false, Json::error_handler_t::replace),
      "application/json");
  if (!res) {
    throw TransportError("POST " + url_ + "/infer failed: " +
                         httplib::to_string(res.error()));
  }
  if (res->status >= 500) {
    throw TransportError("POST " + url_ + "/infer returned HTTP " +
                         std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ConformanceError("POST " + url_ + "/infer returned HTTP " +
                           std::to_string(res->status));
  }
  return ParseReply(res->body);
}

void ServeStdio(const std::function<std::string(std::string_view)>& handler,
                std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << handler(line) << '\n';
    out.flush();
  }
}

void ServeHttp(const std::function<std::string(std::string_view)>& handler,
               const std::string& host, int port,
               const std::function<void(int)>& on_listen) {
  httplib::Server server;
  server.Post("/infer", [&handler](const httplib::Request& req,
                                   httplib::Response& res) {
    res.set_content(handler(req.body), "application/json");
  });
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
    if (bound < 0) throw TransportError("cannot bind " + host);
  } else if (!server.bind_to_port(host, port)) {
    throw TransportError("cannot bind " + host + ":" + std::to_string(port));
  }
  if (on_listen) on_listen(bound);
  if (!server.listen_after_bind()) {
    throw TransportError("http server on " + host + " stopped");
  }
}

}  // namespace nlefaith
