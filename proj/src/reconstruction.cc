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

#include "nlefaith/reconstruction.h"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "nlefaith/csv.h"
#include "nlefaith/error.h"
#include "nlefaith/text.h"

namespace nlefaith {

namespace {

// Whitespace runs become one space; the ends are kept.
std::string SqueezeSpaces(std::string_view text) {
  std::string out;
  bool in_space = false;
  for (char c : text) {
    if (IsAsciiSpace(c)) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

bool IsTerminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool IsTrailingPunct(char c) {
  return IsTerminal(c) || c == ',' || c == ';' || c == ':';
}

std::string StripTrailing(std::string text, bool (*pred)(char)) {
  while (!text.empty() && (pred(text.back()) || IsAsciiSpace(text.back()))) {
    text.pop_back();
  }
  return text;
}

std::string CleanCapture(std::string_view span) {
  return std::string(
      TrimWhitespace(StripTrailing(std::string(TrimWhitespace(span)),
                                   IsTrailingPunct)));
}

bool StartsWithIgnoreCase(std::string_view text, std::string_view prefix) {
  return text.size() >= prefix.size() &&
         EqualsIgnoreAsciiCase(text.substr(0, prefix.size()), prefix);
}

bool EndsWithIgnoreCase(std::string_view text, std::string_view suffix) {
  return text.size() >= suffix.size() &&
         EqualsIgnoreAsciiCase(text.substr(text.size() - suffix.size()), suffix);
}

// Fills captures[k - 1] for literal k onwards; `pos` is where capture k - 1
// starts.
bool Solve(std::string_view text, const std::vector<std::string>& literals,
           size_t k, size_t pos, std::vector<std::string>* captures) {
  const size_t n = literals.size() - 1;
  if (k == n) {
    const std::string& last = literals[n];
    if (text.size() < pos + last.size() || !EndsWithIgnoreCase(text, last)) {
      return false;
    }
    std::string cap =
        CleanCapture(text.substr(pos, text.size() - last.size() - pos));
    if (cap.empty()) return false;
    (*captures)[k - 1] = std::move(cap);
    return true;
  }
  const std::string& lit = literals[k];
  for (size_t q = FindIgnoreAsciiCase(text, lit, pos + 1);
       q != std::string_view::npos;
       q = FindIgnoreAsciiCase(text, lit, q + 1)) {
    std::string cap = CleanCapture(text.substr(pos, q - pos));
    if (cap.empty()) continue;
    if (Solve(text, literals, k + 1, q + lit.size(), captures)) {
      (*captures)[k - 1] = std::move(cap);
      return true;
    }
  }
  return false;
}

std::optional<std::vector<std::string>> MatchOne(std::string_view text,
                                                 const NleTemplate& t) {
  if (!StartsWithIgnoreCase(text, t.literals[0])) return std::nullopt;
  std::vector<std::string> captures(t.slots.size());
  if (!Solve(text, t.literals, 1, t.literals[0].size(), &captures)) {
    return std::nullopt;
  }
  return captures;
}

}  // namespace

size_t NleTemplate::LiteralLength() const {
  size_t n = 0;
  for (const auto& l : literals) n += l.size();
  return n;
}

NleTemplate ParseTemplate(std::string id, std::string_view pattern,
                          bool reconstructable,
                          std::optional<std::string> label_scope) {
  NleTemplate t;
  t.id = std::move(id);
  t.pattern = std::string(pattern);
  t.reconstructable = reconstructable;
  t.label_scope = std::move(label_scope);
  const std::string where = "template '" + t.id + "'";
  std::string text = SqueezeSpaces(TrimWhitespace(pattern));
  text = StripTrailing(std::move(text), IsTerminal);
  std::string literal;
  size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, 3, "<X>") == 0 || text.compare(i, 3, "<Y>") == 0) {
      std::string slot(1, text[i + 1]);
      if (std::find(t.slots.begin(), t.slots.end(), slot) != t.slots.end()) {
        throw DataError(where + " repeats slot <" + slot + ">");
      }
      if (!t.slots.empty() && literal.empty()) {
        throw DataError(where + " has adjacent slots");
      }
      t.literals.push_back(std::move(literal));
      literal.clear();
      t.slots.push_back(std::move(slot));
      i += 3;
      continue;
    }
    if (text[i] == '<' && i + 2 < text.size() && text[i + 2] == '>') {
      throw DataError(where + " uses unknown slot " + text.substr(i, 3));
    }
    literal.push_back(text[i++]);
  }
  t.literals.push_back(std::move(literal));
  if (t.slots.empty()) throw DataError(where + " has no slots");
  if (t.slots.size() > 2) throw DataError(where + " has more than two slots");
  if (t.slots.size() == 1) t.reconstructable = false;
  return t;
}

std::vector<NleTemplate> ParseTemplates(std::string_view jsonl) {
  std::vector<NleTemplate> out;
  std::unordered_set<std::string> ids;
  size_t line_no = 0;
  for (std::string_view line : SplitLines(jsonl)) {
    ++line_no;
    if (TrimWhitespace(line).empty()) continue;
    const std::string where = "template line " + std::to_string(line_no);
    try {
      Json j = Json::parse(line);
      std::string id = j.at("id").get<std::string>();
      if (!ids.insert(id).second) throw DataError("duplicate template id '" + id + "'");
      std::optional<std::string> scope;
      const Json s = j.value("label_scope", Json(nullptr));
      if (!s.is_null()) scope = CanonicalLabel(s.get<std::string>());
      out.push_back(ParseTemplate(std::move(id),
                                  j.at("pattern").get<std::string>(),
                                  j.value("reconstructable", true),
                                  std::move(scope)));
    } catch (const Json::exception& e) {
      throw DataError(where + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<NleTemplate> LoadTemplates(const std::string& path) {
  try {
    return ParseTemplates(ReadFile(path));
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string RenderTemplate(const NleTemplate& t, std::string_view x,
                           std::string_view y) {
  std::string out = t.literals[0];
  for (size_t k = 0; k < t.slots.size(); ++k) {
    out += t.slots[k] == "X" ? x : y;
    out += t.literals[k + 1];
  }
  return out;
}

std::optional<TemplateMatch> MatchTemplate(
    std::string_view nle, const std::vector<NleTemplate>& templates,
    const std::optional<std::string>& label) {
  const std::string text =
      StripTrailing(CollapseWhitespace(nle), IsTerminal);
  if (text.empty()) return std::nullopt;
  std::vector<size_t> order(templates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return templates[a].LiteralLength() > templates[b].LiteralLength();
  });
  for (size_t idx : order) {
    const NleTemplate& t = templates[idx];
    if (t.label_scope && label && *t.label_scope != *label) continue;
    auto captures = MatchOne(text, t);
    if (!captures) continue;
    TemplateMatch m;
    m.template_id = t.id;
    m.reconstructable = t.reconstructable;
    for (size_t k = 0; k < t.slots.size(); ++k) {
      if (t.slots[k] == "X") {
        m.x = (*captures)[k];
      } else {
        m.y = (*captures)[k];
      }
    }
    return m;
  }
  return std::nullopt;
}

bool IsSentenceLike(std::string_view span, const Lexicon& lex) {
  bool subject = false;
  bool verb = false;
  for (const Token& t : Tokenize(span).tokens) {
    PosSet tags = lex.Tags(t.match_form);
    subject = subject || tags.Has(Pos::kNoun) || tags.Has(Pos::kPron);
    verb = verb || tags.Has(Pos::kVerb);
  }
  return subject && verb;
}

std::string SentenceCase(std::string_view span) {
  std::string out = CapitalizeFirst(TrimWhitespace(span));
  if (!out.empty() && !IsTerminal(out.back())) out.push_back('.');
  return out;
}

EsnliReconstruction ReconstructEsnli(const Instance& instance,
                                     std::string_view nle,
                                     const std::vector<NleTemplate>& templates,
                                     const Lexicon& lex,
                                     const std::optional<std::string>& label) {
  if (instance.task != TaskKind::kNli) {
    throw DataError("template reconstruction needs an NLI instance");
  }
  EsnliReconstruction out;
  out.match = MatchTemplate(nle, templates, label);
  if (!out.match || !out.match->reconstructable || !out.match->y) return out;
  if (!IsSentenceLike(out.match->x, lex) || !IsSentenceLike(*out.match->y, lex)) {
    return out;
  }
  Instance r;
  r.id = instance.id;
  r.task = TaskKind::kNli;
  r.fields = {{"premise", NormalizeNfc(SentenceCase(out.match->x))},
              {"hypothesis", NormalizeNfc(SentenceCase(*out.match->y))}};
  r.label_set = instance.label_set;
  ValidateInstance(r);
  out.instance = std::move(r);
  return out;
}

ComveReconstruction ReconstructComve(const Instance& instance,
                                     const ModelOutput& original) {
  if (instance.task != TaskKind::kCommonsenseChoice) {
    throw DataError("sentence replacement needs a ComVE instance");
  }
  const std::string nle(TrimWhitespace(NormalizeNfc(original.nle)));
  if (nle.empty()) {
    throw DataError("empty explanation for '" + instance.id + "'");
  }
  const auto& labels = ComveLabels();
  std::string sensible;
  if (original.label == labels[0]) {
    sensible = "sent2";
  } else if (original.label == labels[1]) {
    sensible = "sent1";
  } else {
    throw ConformanceError("label '" + original.label +
                           "' is not a ComVE slot label");
  }
  ComveReconstruction out;
  out.instance = instance;
  out.instance.gold_label.reset();
  out.instance.gold_nle.reset();
  *out.instance.MutableField(sensible) = nle;
  out.expected_label = original.label;
  return out;
}

Json ReconstructionRecordToJson(const ReconstructionRecord& r) {
  Json j;
  j["schema"] = kReconstructionSchema;
  j["instance_id"] = r.instance_id;
  j["reconstructable"] = r.reconstructable;
  j["template_id"] = r.template_id ? Json(*r.template_id) : Json(nullptr);
  j["reconstructed"] =
      r.reconstructed ? InstanceToJson(*r.reconstructed) : Json(nullptr);
  j["original_label"] = r.original_label;
  j["original_nle"] = r.original_nle;
  j["expected_label"] =
      r.expected_label ? Json(*r.expected_label) : Json(nullptr);
  j["reconstructed_label"] =
      r.reconstructed_label ? Json(*r.reconstructed_label) : Json(nullptr);
  j["unfaithful"] = r.unfaithful ? Json(*r.unfaithful) : Json(nullptr);
  j["errored"] = r.errored;
  j["error"] = r.errored ? Json(r.error) : Json(nullptr);
  return j;
}

ReconstructionRecord ReconstructionRecordFromJson(const Json& j) {
  if (!j.is_object()) throw DataError("reconstruction record must be an object");
  ReconstructionRecord r;
  try {
    if (j.value("schema", std::string()) != kReconstructionSchema) {
      throw DataError("unsupported reconstruction record schema");
    }
    r.instance_id = j.at("instance_id").get<std::string>();
    r.reconstructable = j.at("reconstructable").get<bool>();
    if (!j.at("template_id").is_null()) {
      r.template_id = j["template_id"].get<std::string>();
    }
    if (!j.at("reconstructed").is_null()) {
      r.reconstructed = InstanceFromJson(j["reconstructed"]);
    }
    r.original_label = j.at("original_label").get<std::string>();
    r.original_nle = j.value("original_nle", std::string());
    if (!j.at("expected_label").is_null()) {
      r.expected_label = j["expected_label"].get<std::string>();
    }
    if (!j.at("reconstructed_label").is_null()) {
      r.reconstructed_label = j["reconstructed_label"].get<std::string>();
    }
    if (!j.at("unfaithful").is_null()) r.unfaithful = j["unfaithful"].get<bool>();
    r.errored = j.value("errored", false);
    if (r.errored) r.error = j.value("error", std::string());
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed reconstruction record: ") + e.what());
  }
  if (r.unfaithful.has_value() && !r.reconstructable) {
    throw DataError("record '" + r.instance_id +
                    "' has a verdict but is not reconstructable");
  }
  return r;
}

ReconstructionRecord RunReconstruction(const Instance& instance,
                                       const ModelOutput& original,
                                       Endpoint& endpoint,
                                       const std::vector<NleTemplate>& templates,
                                       const Lexicon& lex) {
  ReconstructionRecord rec;
  rec.instance_id = instance.id;
  rec.original_label = original.label;
  rec.original_nle = original.nle;
  std::optional<Instance> rebuilt;
  switch (instance.task) {
    case TaskKind::kNli: {
      EsnliReconstruction e =
          ReconstructEsnli(instance, original.nle, templates, lex, original.label);
      if (e.match) rec.template_id = e.match->template_id;
      if (e.instance) {
        rebuilt = std::move(e.instance);
        rec.expected_label = original.label;
      }
      break;
    }
    case TaskKind::kCommonsenseChoice: {
      ComveReconstruction c = ReconstructComve(instance, original);
      rebuilt = std::move(c.instance);
      rec.expected_label = std::move(c.expected_label);
      break;
    }
    case TaskKind::kMultiChoiceQa:
      throw DataError("input reconstruction is not defined for qa");
  }
  if (!rebuilt) return rec;
  rec.reconstructable = true;
  rec.reconstructed = rebuilt;
  try {
    Prediction p = endpoint.Predict(*rebuilt);
    rec.reconstructed_label = p.label;
    rec.unfaithful = p.label != *rec.expected_label;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kTransport) throw;
    rec.reconstructed_label.reset();
    rec.unfaithful.reset();
    rec.errored = true;
    rec.error = e.what();
  }
  return rec;
}

std::string SerializeRecords(const std::vector<ReconstructionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += ReconstructionRecordToJson(r).dump(-1, ' ', false,
                                              Json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

std::vector<ReconstructionRecord> LoadReconstructionRecords(
    const std::string& path) {
  std::string text = ReadFile(path);
  std::vector<ReconstructionRecord> out;
  size_t line_no = 0;
  for (std::string_view line : SplitLines(text)) {
    ++line_no;
    if (TrimWhitespace(line).empty()) continue;
    try {
      out.push_back(ReconstructionRecordFromJson(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace nlefaith
