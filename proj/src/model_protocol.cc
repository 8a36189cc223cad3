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

#include "nlefaith/model_protocol.h"

#include <algorithm>
#include <cmath>

#include "nlefaith/error.h"
#include "nlefaith/mock_model.h"
#include "nlefaith/text.h"
#include "nlefaith/transport.h"

namespace nlefaith {

std::string_view SetupName(Setup setup) {
  switch (setup) {
    case Setup::kMtRe:
      return "MT-Re";
    case Setup::kMtRa:
      return "MT-Ra";
    case Setup::kStRe:
      return "ST-Re";
    case Setup::kStRa:
      return "ST-Ra";
    case Setup::kOther:
      return "other";
  }
  return "other";
}

Setup ParseSetup(std::string_view name) {
  for (Setup s :
       {Setup::kMtRe, Setup::kMtRa, Setup::kStRe, Setup::kStRa, Setup::kOther}) {
    if (EqualsIgnoreAsciiCase(SetupName(s), name)) return s;
  }
  throw ConformanceError("unknown setup '" + std::string(name) + "'");
}

Json CapabilitiesToJson(const Capabilities& caps) {
  Json j;
  j["name"] = caps.name;
  j["setup"] = SetupName(caps.setup);
  j["supports_scores"] = caps.supports_scores;
  j["deterministic"] = caps.deterministic;
  j["supports_predict"] = caps.supports_predict;
  j["supports_nle"] = caps.supports_nle;
  return j;
}

Capabilities CapabilitiesFromJson(const Json& j) {
  if (!j.is_object()) throw ConformanceError("capabilities must be an object");
  Capabilities caps;
  try {
    caps.name = j.value("name", std::string());
    caps.setup = ParseSetup(j.value("setup", std::string("other")));
    caps.supports_scores = j.value("supports_scores", false);
    if (!j.contains("deterministic") || !j["deterministic"].is_boolean()) {
      throw ConformanceError("capabilities lack boolean 'deterministic'");
    }
    caps.deterministic = j["deterministic"].get<bool>();
    caps.supports_predict = j.value("supports_predict", true);
    caps.supports_nle = j.value("supports_nle", true);
  } catch (const Json::exception& e) {
    throw ConformanceError(std::string("malformed capabilities: ") + e.what());
  }
  return caps;
}

namespace {

Json ScoresToJson(const std::optional<LabelScores>& scores) {
  if (!scores) return nullptr;
  Json j = Json::object();
  for (const auto& [k, v] : *scores) j[k] = v;
  return j;
}

std::optional<LabelScores> ScoresFromJson(const Json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_object()) throw ConformanceError("scores must be an object or null");
  LabelScores scores;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) {
      throw ConformanceError("score for '" + k + "' is not a number");
    }
    scores[k] = v.get<double>();
  }
  return scores;
}

std::string Excerpt(const std::string& s) {
  constexpr size_t kMax = 120;
  return s.size() <= kMax ? s : s.substr(0, kMax) + "...";
}

}  // namespace

Json ModelOutputToJson(const ModelOutput& out) {
  Json j;
  j["label"] = out.label;
  j["nle"] = out.nle;
  j["scores"] = ScoresToJson(out.label_scores);
  return j;
}

ModelOutput ModelOutputFromJson(const Json& j) {
  ModelOutput out;
  try {
    out.label = j.at("label").get<std::string>();
    out.nle = j.value("nle", Json(nullptr)).is_null()
                  ? std::string()
                  : j["nle"].get<std::string>();
    out.label_scores = ScoresFromJson(j.value("scores", Json(nullptr)));
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed model output: ") + e.what());
  }
  return out;
}

void CheckPrediction(const Instance& instance, const std::string& label,
                     const std::optional<LabelScores>& scores) {
  const auto& labels = instance.label_set;
  if (std::find(labels.begin(), labels.end(), label) == labels.end()) {
    throw ConformanceError("label '" + label + "' for instance '" +
                           instance.id + "' is outside the label set");
  }
  if (!scores) return;
  double sum = 0.0;
  double best = -1.0;
  for (const auto& [k, v] : *scores) {
    if (std::find(labels.begin(), labels.end(), k) == labels.end()) {
      throw ConformanceError("score for unknown label '" + k + "'");
    }
    if (!std::isfinite(v)) {
      throw ConformanceError("non-finite score for '" + k + "'");
    }
    sum += v;
    best = std::max(best, v);
  }
  if (std::fabs(sum - 1.0) > 1e-6) {
    throw ConformanceError("scores for instance '" + instance.id +
                           "' sum to " + std::to_string(sum));
  }
  auto it = scores->find(label);
  if (it == scores->end() || it->second < best) {
    throw ConformanceError("label '" + label +
                           "' is not the argmax of its scores");
  }
}

double MassOffLabel(const LabelScores& scores, const std::string& label) {
  double mass = 0.0;
  for (const auto& [k, v] : scores) {
    if (k != label) mass += v;
  }
  return mass;
}

ProtocolEndpoint::ProtocolEndpoint(std::unique_ptr<Transport> transport,
                                   int retries)
    : transport_(std::move(transport)), retries_(retries < 0 ? 0 : retries) {}

Json ProtocolEndpoint::Exchange(
    std::string_view op, const Instance* instance,
    const std::optional<std::string>& condition_label) {
  Json request;
  request["id"] = "r" + std::to_string(next_id_.fetch_add(1));
  request["op"] = op;
  request["instance"] = instance ? InstanceToJson(*instance) : Json(nullptr);
  request["condition_label"] =
      condition_label ? Json(*condition_label) : Json(nullptr);
  for (int attempt = 0;; ++attempt) {
    try {
      Json response = transport_->Call(request);
      if (!response.is_object()) {
        throw ConformanceError("reply is not a JSON object: " +
                               Excerpt(response.dump()));
      }
      if (!response.contains("id") || response["id"] != request["id"]) {
        throw ConformanceError("reply id does not match request id " +
                               request["id"].get<std::string>());
      }
      return response;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kTransport || attempt >= retries_) throw;
    }
  }
}

namespace {

std::optional<std::string> ErrorField(const Json& response) {
  if (!response.contains("error") || response["error"].is_null()) {
    return std::nullopt;
  }
  return response["error"].is_string() ? response["error"].get<std::string>()
                                       : response["error"].dump();
}

}  // namespace

Capabilities ProtocolEndpoint::Handshake() {
  Json response = Exchange("handshake", nullptr, std::nullopt);
  if (auto err = ErrorField(response)) {
    throw ConformanceError("handshake failed: " + *err);
  }
  if (!response.contains("capabilities")) {
    throw ConformanceError("handshake reply lacks capabilities");
  }
  Capabilities caps = CapabilitiesFromJson(response["capabilities"]);
  std::lock_guard<std::mutex> lock(caps_mu_);
  caps_ = caps;
  return caps;
}

Capabilities ProtocolEndpoint::EnsureCapabilities() {
  {
    std::lock_guard<std::mutex> lock(caps_mu_);
    if (caps_) return *caps_;
  }
  return Handshake();
}

ModelOutput ProtocolEndpoint::Infer(
    const Instance& instance, const std::optional<std::string>& condition_label) {
  const Capabilities caps = EnsureCapabilities();
  Json response = Exchange("infer", &instance, condition_label);
  if (auto err = ErrorField(response)) {
    throw ConformanceError("infer on '" + instance.id + "' failed: " + *err);
  }
  ModelOutput out;
  try {
    if (!response.contains("label") || !response["label"].is_string()) {
      throw ConformanceError("infer reply lacks a string label");
    }
    out.label = response["label"].get<std::string>();
    const Json nle = response.value("nle", Json(nullptr));
    if (nle.is_string()) {
      out.nle = nle.get<std::string>();
    } else if (!nle.is_null()) {
      throw ConformanceError("nle must be a string or null");
    }
    if (out.nle.empty() && caps.supports_nle) {
      throw ConformanceError("empty NLE from a model declaring NLE support");
    }
    out.label_scores = ScoresFromJson(response.value("scores", Json(nullptr)));
  } catch (const Json::exception& e) {
    throw ConformanceError(std::string("malformed infer reply: ") + e.what());
  }
  CheckPrediction(instance, out.label, out.label_scores);
  return out;
}

Prediction ProtocolEndpoint::Predict(const Instance& instance) {
  const Capabilities caps = EnsureCapabilities();
  if (!caps.supports_predict || predict_unsupported_.load()) {
    ModelOutput full = Infer(instance);
    return {full.label, full.label_scores};
  }
  Json response = Exchange("predict", &instance, std::nullopt);
  if (auto err = ErrorField(response)) {
    if (*err == "unsupported-op") {
      predict_unsupported_.store(true);
      ModelOutput full = Infer(instance);
      return {full.label, full.label_scores};
    }
    throw ConformanceError("predict on '" + instance.id + "' failed: " + *err);
  }
  Prediction p;
  try {
    if (!response.contains("label") || !response["label"].is_string()) {
      throw ConformanceError("predict reply lacks a string label");
    }
    p.label = response["label"].get<std::string>();
    p.label_scores = ScoresFromJson(response.value("scores", Json(nullptr)));
  } catch (const Json::exception& e) {
    throw ConformanceError(std::string("malformed predict reply: ") + e.what());
  }
  CheckPrediction(instance, p.label, p.label_scores);
  return p;
}

namespace {

std::string CacheKey(const Instance& instance,
                     const std::optional<std::string>& condition) {
  std::string key = InstanceToJson(instance).dump();
  if (condition) {
    key += '\x1f';
    key += *condition;
  }
  return key;
}

}  // namespace

ModelOutput CachingEndpoint::Infer(
    const Instance& instance, const std::optional<std::string>& condition_label) {
  std::string key = CacheKey(instance, condition_label);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = infer_cache_.find(key);
    if (it != infer_cache_.end()) return it->second;
  }
  ModelOutput out = inner_.Infer(instance, condition_label);
  std::lock_guard<std::mutex> lock(mu_);
  infer_cache_.emplace(key, out);
  return out;
}

Prediction CachingEndpoint::Predict(const Instance& instance) {
  std::string key = CacheKey(instance, std::nullopt);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = predict_cache_.find(key);
    if (it != predict_cache_.end()) return it->second;
  }
  Prediction p = inner_.Predict(instance);
  std::lock_guard<std::mutex> lock(mu_);
  predict_cache_.emplace(key, p);
  return p;
}

EndpointSpec EndpointSpecFromJson(const Json& j) {
  if (!j.is_object()) throw UsageError("endpoint must be an object");
  EndpointSpec spec;
  try {
    std::string t = j.at("transport").get<std::string>();
    if (t == "mock") {
      spec.transport = TransportKind::kMock;
      spec.rules_path = j.at("rules").get<std::string>();
    } else if (t == "subprocess") {
      spec.transport = TransportKind::kSubprocess;
      spec.command = j.at("command").get<std::vector<std::string>>();
      if (spec.command.empty()) throw UsageError("endpoint command is empty");
    } else if (t == "http") {
      spec.transport = TransportKind::kHttp;
      spec.url = j.at("url").get<std::string>();
    } else {
      throw UsageError("unknown endpoint transport '" + t + "'");
    }
    spec.timeout_s = j.value("timeout_s", spec.timeout_s);
    spec.max_parallel = j.value("max_parallel", spec.max_parallel);
    spec.retries = j.value("retries", spec.retries);
  } catch (const Json::exception& e) {
    throw UsageError(std::string("malformed endpoint spec: ") + e.what());
  }
  if (spec.max_parallel < 1) throw UsageError("max_parallel must be >= 1");
  if (spec.timeout_s <= 0) throw UsageError("timeout_s must be > 0");
  return spec;
}

Json EndpointSpecToJson(const EndpointSpec& spec) {
  Json j;
  switch (spec.transport) {
    case TransportKind::kMock:
      j["transport"] = "mock";
      j["rules"] = spec.rules_path;
      break;
    case TransportKind::kSubprocess:
      j["transport"] = "subprocess";
      j["command"] = spec.command;
      break;
    case TransportKind::kHttp:
      j["transport"] = "http";
      j["url"] = spec.url;
      break;
  }
  j["timeout_s"] = spec.timeout_s;
  j["max_parallel"] = spec.max_parallel;
  j["retries"] = spec.retries;
  return j;
}

std::unique_ptr<Endpoint> OpenEndpoint(const EndpointSpec& spec) {
  switch (spec.transport) {
    case TransportKind::kMock:
      return MakeMockEndpoint(MockModel::FromFile(spec.rules_path));
    case TransportKind::kSubprocess:
      return std::make_unique<ProtocolEndpoint>(
          std::make_unique<StdioTransport>(spec.command, spec.timeout_s,
                                           spec.max_parallel),
          spec.retries);
    case TransportKind::kHttp:
      return std::make_unique<ProtocolEndpoint>(
          std::make_unique<HttpTransport>(spec.url, spec.timeout_s,
                                          spec.max_parallel),
          spec.retries);
  }
  throw UsageError("unknown transport");
}

}  // namespace nlefaith
