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

#ifndef NLEFAITH_TRANSPORT_H_
#define NLEFAITH_TRANSPORT_H_

#include <sys/types.h>

#include <condition_variable>
#include <functional>
#include <future>
#include <iosfwd>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "nlefaith/model_protocol.h"

namespace nlefaith {

// Limits the number of requests in flight.
class InflightLimit {
 public:
  explicit InflightLimit(int limit) : available_(limit < 1 ? 1 : limit) {}
  void Acquire();
  void Release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

// Runs the model as a child process speaking JSON lines on stdin/stdout.
// Requests are pipelined (up to `max_parallel` in flight) and replies are
// matched back by id, so the child may answer out of order.
class StdioTransport : public Transport {
 public:
  StdioTransport(std::vector<std::string> argv, double timeout_s,
                 int max_parallel);
  ~StdioTransport() override;

  StdioTransport(const StdioTransport&) = delete;
  StdioTransport& operator=(const StdioTransport&) = delete;

  Json Call(const Json& request) override;

 private:
  void ReadLoop();
  void FailAll(const std::string& message, bool conformance);

  std::vector<std::string> argv_;
  double timeout_s_;
  InflightLimit limit_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::mutex write_mu_;
  std::mutex mu_;
  std::map<std::string, std::promise<Json>> pending_;
  bool dead_ = false;
  bool dead_conformance_ = false;
  std::string dead_reason_;
  std::thread reader_;
};

// POSTs each request to <url>/infer.
class HttpTransport : public Transport {
 public:
  HttpTransport(std::string url, double timeout_s, int max_parallel);
  Json Call(const Json& request) override;

 private:
  std::string url_;
  double timeout_s_;
  InflightLimit limit_;
};

// Calls a handler directly; used for the in-process mock.
class FunctionTransport : public Transport {
 public:
  explicit FunctionTransport(std::function<Json(const Json&)> fn)
      : fn_(std::move(fn)) {}
  Json Call(const Json& request) override { return fn_(request); }

 private:
  std::function<Json(const Json&)> fn_;
};

// Serves a line handler over the given streams until EOF.
void ServeStdio(const std::function<std::string(std::string_view)>& handler,
                std::istream& in, std::ostream& out);

// Serves POST /infer until the process is terminated. Port 0 picks a free
// port; `on_listen` receives the bound port before serving starts.
void ServeHttp(const std::function<std::string(std::string_view)>& handler,
               const std::string& host, int port,
               const std::function<void(int)>& on_listen = nullptr);

}  // namespace nlefaith

#endif  // NLEFAITH_TRANSPORT_H_
