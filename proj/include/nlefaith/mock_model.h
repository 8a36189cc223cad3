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

// Deterministic rule-based model used for fixtures, oracles and protocol
// tests.
//
// Rules file (JSONL). An optional first line configures the model:
//   {"mock": {"name": "golden", "scores": "none"|"one-hot",
//             "deterministic": true, "supports_predict": true,
//             "setup": "other"}}
// then one rule per line, first match wins, last rule must be "always":
//   {"trigger": {"type": "token-present", "field": "hypothesis",
//                "word": "blue"},
//    "label": "contradiction", "nle": "A man is not a tall person.",
//    "scores": {"contradiction": 0.9, ...}}        // scores optional
//   {"trigger": {"type": "always"}, "label": "neutral", "nle": "..."}
//
// "word" may be a phrase; it matches contiguous tokens by match form.
// "label" and "nle" may reference fields as {premise}, {choice2}, ...;
// the rendered label is lowercased.

#ifndef NLEFAITH_MOCK_MODEL_H_
#define NLEFAITH_MOCK_MODEL_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlefaith/corpus.h"
#include "nlefaith/model_protocol.h"

namespace nlefaith {

struct MockTrigger {
  enum class Type { kTokenPresent, kAlways };
  Type type = Type::kAlways;
  std::string field;
  std::vector<std::string> phrase;  // match forms
};

struct MockRule {
  MockTrigger trigger;
  std::string label;
  std::string nle_template;
  std::optional<LabelScores> scores;
};

enum class MockScores { kNone, kOneHot };

struct MockConfig {
  std::string name = "mock";
  MockScores scores = MockScores::kNone;
  bool deterministic = true;
  bool supports_predict = true;
  Setup setup = Setup::kOther;
};

MockRule TokenPresentRule(std::string field, std::string_view phrase,
                          std::string label, std::string nle);
MockRule AlwaysRule(std::string label, std::string nle);

class MockModel {
 public:
  // Throws DataError unless the final rule is `always`.
  explicit MockModel(std::vector<MockRule> rules, MockConfig config = {});

  static MockModel FromFile(const std::string& path);
  static MockModel FromJsonl(std::string_view text);

  Capabilities capabilities() const;
  const std::vector<MockRule>& rules() const { return rules_; }

  // First matching rule, with placeholders substituted.
  ModelOutput Infer(const Instance& instance) const;

  // Wire handler: request object -> response object. Never throws; every
  // failure becomes an error response carrying the request id.
  Json Handle(const Json& request) const;
  // Same for a raw request line (used by the stdio server).
  std::string HandleLine(std::string_view line) const;

 private:
  std::vector<MockRule> rules_;
  MockConfig config_;
};

// Endpoint over an in-process MockModel that still goes through the JSON
// wire format.
std::unique_ptr<Endpoint> MakeMockEndpoint(MockModel model);

}  // namespace nlefaith

#endif  // NLEFAITH_MOCK_MODEL_H_
