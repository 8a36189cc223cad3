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

#include "nlefaith/mock_model.h"

#include "nlefaith/csv.h"
#include "nlefaith/error.h"
#include "nlefaith/lexicon.h"
#include "nlefaith/text.h"
#include "nlefaith/transport.h"

namespace nlefaith {

namespace {

std::vector<std::string> PhraseForms(std::string_view phrase) {
  std::vector<std::string> forms;
  for (const Token& t : Tokenize(phrase).tokens) {
    if (!t.match_form.empty()) forms.push_back(t.match_form);
  }
  return forms;
}

bool ContainsPhrase(const std::string& text,
                    const std::vector<std::string>& phrase) {
  if (phrase.empty()) return false;
  std::vector<std::string> forms;
  for (const Token& t : Tokenize(text).tokens) forms.push_back(t.match_form);
  if (forms.size() < phrase.size()) return false;
  for (size_t i = 0; i + phrase.size() <= forms.size(); ++i) {
    bool all = true;
    for (size_t k = 0; k < phrase.size() && all; ++k) {
      all = forms[i + k] == phrase[k];
    }
    if (all) return true;
  }
  return false;
}

std::string Render(std::string_view tmpl, const Instance& instance) {
  std::string out;
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        std::string_view name = tmpl.substr(i + 1, close - i - 1);
        if (const std::string* value = instance.Field(name)) {
          out += *value;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

MockRule RuleFromJson(const Json& j, size_t line) {
  const std::string where = "mock rule on line " + std::to_string(line);
  if (!j.is_object()) throw DataError(where + " is not an object");
  MockRule rule;
  try {
    const Json& trig = j.at("trigger");
    std::string type = trig.at("type").get<std::string>();
    if (type == "always") {
      rule.trigger.type = MockTrigger::Type::kAlways;
    } else if (type == "token-present") {
      rule.trigger.type = MockTrigger::Type::kTokenPresent;
      rule.trigger.field = trig.at("field").get<std::string>();
      rule.trigger.phrase = PhraseForms(trig.at("word").get<std::string>());
      if (rule.trigger.phrase.empty()) {
        throw DataError(where + ": empty trigger word");
      }
    } else {
      throw DataError(where + ": unknown trigger type '" + type + "'");
    }
    rule.label = j.at("label").get<std::string>();
    rule.nle_template = j.value("nle", std::string());
    if (j.contains("scores") && !j["scores"].is_null()) {
      LabelScores scores;
      for (const auto& [k, v] : j["scores"].items()) {
        scores[ToLower(k)] = v.get<double>();
      }
      rule.scores = std::move(scores);
    }
  } catch (const Json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
  return rule;
}

MockConfig ConfigFromJson(const Json& j) {
  MockConfig config;
  try {
    config.name = j.value("name", config.name);
    std::string scores = j.value("scores", std::string("none"));
    if (scores == "none") {
      config.scores = MockScores::kNone;
    } else if (scores == "one-hot") {
      config.scores = MockScores::kOneHot;
    } else {
      throw DataError("unknown mock scores mode '" + scores + "'");
    }
    config.deterministic = j.value("deterministic", config.deterministic);
    config.supports_predict =
        j.value("supports_predict", config.supports_predict);
    config.setup = ParseSetup(j.value("setup", std::string("other")));
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed mock config: ") + e.what());
  } catch (const Error& e) {
    throw DataError(e.what());
  }
  return config;
}

Json ErrorResponse(const Json& id, const std::string& message) {
  Json r;
  r["id"] = id;
  r["label"] = nullptr;
  r["nle"] = nullptr;
  r["scores"] = nullptr;
  r["error"] = message;
  return r;
}

}  // namespace

MockRule TokenPresentRule(std::string field, std::string_view phrase,
                          std::string label, std::string nle) {
  MockRule rule;
  rule.trigger.type = MockTrigger::Type::kTokenPresent;
  rule.trigger.field = std::move(field);
  rule.trigger.phrase = PhraseForms(phrase);
  rule.label = std::move(label);
  rule.nle_template = std::move(nle);
  return rule;
}

MockRule AlwaysRule(std::string label, std::string nle) {
  MockRule rule;
  rule.label = std::move(label);
  rule.nle_template = std::move(nle);
  return rule;
}

MockModel::MockModel(std::vector<MockRule> rules, MockConfig config)
    : rules_(std::move(rules)), config_(std::move(config)) {
  if (rules_.empty() ||
      rules_.back().trigger.type != MockTrigger::Type::kAlways) {
    throw DataError("the last mock rule must have an 'always' trigger");
  }
}

MockModel MockModel::FromFile(const std::string& path) {
  try {
    return FromJsonl(ReadFile(path));
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
}

MockModel MockModel::FromJsonl(std::string_view text) {
  std::vector<MockRule> rules;
  MockConfig config;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    line = TrimWhitespace(line);
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.is_object() && j.contains("mock")) {
      if (!rules.empty()) {
        throw DataError("mock config must precede the rules");
      }
      config = ConfigFromJson(j["mock"]);
      continue;
    }
    rules.push_back(RuleFromJson(j, line_no));
  }
  return MockModel(std::move(rules), std::move(config));
}

Capabilities MockModel::capabilities() const {
  Capabilities caps;
  caps.name = config_.name;
  caps.setup = config_.setup;
  caps.supports_scores = config_.scores != MockScores::kNone;
  caps.deterministic = config_.deterministic;
  caps.supports_predict = config_.supports_predict;
  caps.supports_nle = true;
  return caps;
}

ModelOutput MockModel::Infer(const Instance& instance) const {
  for (const MockRule& rule : rules_) {
    if (rule.trigger.type == MockTrigger::Type::kTokenPresent) {
      const std::string* text = instance.Field(rule.trigger.field);
      if (text == nullptr || !ContainsPhrase(*text, rule.trigger.phrase)) {
        continue;
      }
    }
    ModelOutput out;
    out.label = ToLower(Render(rule.label, instance));
    out.nle = Render(rule.nle_template, instance);
    if (rule.scores) {
      out.label_scores = rule.scores;
    } else if (config_.scores == MockScores::kOneHot) {
      LabelScores scores;
      for (const auto& l : instance.label_set) scores[l] = 0.0;
      scores[out.label] = 1.0;
      out.label_scores = std::move(scores);
    }
    return out;
  }
  throw DataError("no mock rule matched");
}

Json MockModel::Handle(const Json& request) const {
  Json id = nullptr;
  try {
    if (!request.is_object()) return ErrorResponse(id, "request is not an object");
    if (request.contains("id")) id = request["id"];
    const std::string op = request.value("op", std::string());
    if (op == "handshake") {
      Json r;
      r["id"] = id;
      r["label"] = nullptr;
      r["nle"] = nullptr;
      r["scores"] = nullptr;
      r["error"] = nullptr;
      r["capabilities"] = CapabilitiesToJson(capabilities());
      return r;
    }
    if (op != "infer" && op != "predict") {
      return ErrorResponse(id, "unknown op '" + op + "'");
    }
    if (op == "predict" && !config_.supports_predict) {
      return ErrorResponse(id, "unsupported-op");
    }
    if (!request.contains("instance") || request["instance"].is_null()) {
      return ErrorResponse(id, "missing instance");
    }
    Instance instance = InstanceFromJson(request["instance"]);
    ModelOutput out = Infer(instance);
    Json r;
    r["id"] = id;
    r["label"] = out.label;
    r["nle"] = op == "infer" ? Json(out.nle) : Json(nullptr);
    if (out.label_scores) {
      Json s = Json::object();
      for (const auto& [k, v] : *out.label_scores) s[k] = v;
      r["scores"] = s;
    } else {
      r["scores"] = nullptr;
    }
    r["error"] = nullptr;
    return r;
  } catch (const std::exception& e) {
    return ErrorResponse(id, e.what());
  }
}

std::string MockModel::HandleLine(std::string_view line) const {
  Json request;
  try {
    request = Json::parse(line);
  } catch (const Json::exception& e) {
    return ErrorResponse(nullptr, std::string("unparseable request: ") + e.what())
        .dump(-1, ' ', false, Json::error_handler_t::replace);
  }
  return Handle(request).dump(-1, ' ', false, Json::error_handler_t::replace);
}

std::unique_ptr<Endpoint> MakeMockEndpoint(MockModel model) {
  auto shared = std::make_shared<const MockModel>(std::move(model));
  return std::make_unique<ProtocolEndpoint>(
      std::make_unique<FunctionTransport>(
          [shared](const Json& request) { return shared->Handle(request); }),
      0);
}

}  // namespace nlefaith
