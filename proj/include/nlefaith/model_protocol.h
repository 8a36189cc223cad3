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

// Harness side of the model wire protocol.
//
// Every exchange is one JSON object each way (a line over stdio, or a POST
// /infer body over http):
//
//   request  {"id": str, "op": "handshake"|"infer"|"predict",
//             "instance": <normalized instance>|null,
//             "condition_label": str|null}
//   response {"id": str, "label": str|null, "nle": str|null,
//             "scores": {label: float}|null, "error": str|null,
//             "capabilities": {...}}        // handshake only
//
// capabilities: {"name": str, "setup": "MT-Re"|"MT-Ra"|"ST-Re"|"ST-Ra"|
// "other", "supports_scores": bool, "deterministic": bool,
// "supports_predict": bool (default true), "supports_nle": bool (default
// true)}. A model without a predict fast path may also answer a predict
// request with error "unsupported-op"; the harness then uses infer.

#ifndef NLEFAITH_MODEL_PROTOCOL_H_
#define NLEFAITH_MODEL_PROTOCOL_H_

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nlefaith/corpus.h"

namespace nlefaith {

enum class Setup { kMtRe, kMtRa, kStRe, kStRa, kOther };
std::string_view SetupName(Setup setup);
Setup ParseSetup(std::string_view name);

struct Capabilities {
  std::string name;
  Setup setup = Setup::kOther;
  bool supports_scores = false;
  bool deterministic = false;
  bool supports_predict = true;
  bool supports_nle = true;

  bool operator==(const Capabilities&) const = default;
};

Json CapabilitiesToJson(const Capabilities& caps);
Capabilities CapabilitiesFromJson(const Json& j);

using LabelScores = std::map<std::string, double>;

struct ModelOutput {
  std::string label;
  std::string nle;
  std::optional<LabelScores> label_scores;

  bool operator==(const ModelOutput&) const = default;
};

Json ModelOutputToJson(const ModelOutput& out);
ModelOutput ModelOutputFromJson(const Json& j);

struct Prediction {
  std::string label;
  std::optional<LabelScores> label_scores;
};

// Throws ConformanceError unless `label` is in the instance's label set and
// the scores (when present) are finite, cover only known labels, sum to 1
// within 1e-6 and have `label` among their maxima.
void CheckPrediction(const Instance& instance, const std::string& label,
                     const std::optional<LabelScores>& scores);

// Probability mass the scores put on labels other than `label`.
double MassOffLabel(const LabelScores& scores, const std::string& label);

// A model under test. Implementations must be safe to call concurrently.
class Endpoint {
 public:
  virtual ~Endpoint() = default;

  virtual Capabilities Handshake() = 0;
  virtual ModelOutput Infer(
      const Instance& instance,
      const std::optional<std::string>& condition_label = std::nullopt) = 0;
  // Must agree with Infer(instance).label.
  virtual Prediction Predict(const Instance& instance) = 0;
};

// Carries one request object to the model and returns its response object.
// Throws TransportError on timeout, disconnect or process exit, and
// ConformanceError when the reply is not a JSON object.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Json Call(const Json& request) = 0;
};

// Speaks the wire protocol over a Transport: builds requests, matches ids,
// validates replies, retries transport failures and falls back from predict
// to infer for models without the fast path.
class ProtocolEndpoint : public Endpoint {
 public:
  ProtocolEndpoint(std::unique_ptr<Transport> transport, int retries = 2);

  Capabilities Handshake() override;
  ModelOutput Infer(const Instance& instance,
                    const std::optional<std::string>& condition_label =
                        std::nullopt) override;
  Prediction Predict(const Instance& instance) override;

 private:
  Json Exchange(std::string_view op, const Instance* instance,
                const std::optional<std::string>& condition_label);
  Capabilities EnsureCapabilities();

  std::unique_ptr<Transport> transport_;
  int retries_;
  std::atomic<uint64_t> next_id_{0};
  std::mutex caps_mu_;
  std::optional<Capabilities> caps_;
  std::atomic<bool> predict_unsupported_{false};
};

// Memoizes Infer and Predict by instance content. Valid only for
// deterministic endpoints, which the harness requires anyway.
class CachingEndpoint : public Endpoint {
 public:
  explicit CachingEndpoint(Endpoint& inner) : inner_(inner) {}

  Capabilities Handshake() override { return inner_.Handshake(); }
  ModelOutput Infer(const Instance& instance,
                    const std::optional<std::string>& condition_label =
                        std::nullopt) override;
  Prediction Predict(const Instance& instance) override;

 private:
  Endpoint& inner_;
  std::mutex mu_;
  std::unordered_map<std::string, ModelOutput> infer_cache_;
  std::unordered_map<std::string, Prediction> predict_cache_;
};

enum class TransportKind { kMock, kSubprocess, kHttp };

struct EndpointSpec {
  TransportKind transport = TransportKind::kMock;
  std::string rules_path;            // mock
  std::vector<std::string> command;  // subprocess argv
  std::string url;                   // http base URL, e.g. http://127.0.0.1:8080
  double timeout_s = 60.0;
  int max_parallel = 1;
  int retries = 2;
};

EndpointSpec EndpointSpecFromJson(const Json& j);
Json EndpointSpecToJson(const EndpointSpec& spec);

std::unique_ptr<Endpoint> OpenEndpoint(const EndpointSpec& spec);

}  // namespace nlefaith

#endif  // NLEFAITH_MODEL_PROTOCOL_H_
