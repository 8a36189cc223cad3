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

#include "nlefaith/counterfactual.h"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "nlefaith/csv.h"
#include "nlefaith/error.h"
#include "nlefaith/rng.h"
#include "nlefaith/text.h"

namespace nlefaith {

std::string_view TargetModeName(TargetMode mode) {
  return mode == TargetMode::kAnyFlip ? "any-flip" : "per-target-label";
}

TargetMode ParseTargetMode(std::string_view name) {
  if (name == "any-flip") return TargetMode::kAnyFlip;
  if (name == "per-target-label") return TargetMode::kPerTargetLabel;
  throw UsageError("unknown target_mode '" + std::string(name) + "'");
}

std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kRand:
      return "rand";
    case Provenance::kEdit:
      return "edit";
    case Provenance::kExternal:
      return "external";
  }
  return "external";
}

Provenance ParseProvenance(std::string_view name) {
  if (name == "rand") return Provenance::kRand;
  if (name == "edit") return Provenance::kEdit;
  if (name == "external") return Provenance::kExternal;
  throw DataError("unknown provenance '" + std::string(name) + "'");
}

const std::vector<std::string>& DefaultEditableFields(TaskKind kind) {
  static const std::vector<std::string> kNli = {"hypothesis"};
  static const std::vector<std::string> kQa = {"question"};
  static const std::vector<std::string> kComve = {"sent1", "sent2"};
  switch (kind) {
    case TaskKind::kNli:
      return kNli;
    case TaskKind::kMultiChoiceQa:
      return kQa;
    case TaskKind::kCommonsenseChoice:
      return kComve;
  }
  return kNli;
}

const std::vector<std::string>& EditorConfig::FieldsFor(TaskKind kind) const {
  auto it = editable_fields.find(kind);
  return it != editable_fields.end() ? it->second : DefaultEditableFields(kind);
}

EditorConfig DefaultRandomConfig() { return EditorConfig(); }

EditorConfig DefaultSearchConfig() {
  EditorConfig cfg;
  cfg.max_insert_len = 3;
  cfg.target_mode = TargetMode::kPerTargetLabel;
  return cfg;
}

void ValidateEditorConfig(const EditorConfig& cfg) {
  if (cfg.n_positions < 1) throw UsageError("n_positions must be >= 1");
  if (cfg.n_candidates < 1) throw UsageError("n_candidates must be >= 1");
  if (cfg.max_insert_len < 1 || cfg.max_insert_len > 3) {
    throw UsageError("max_insert_len must be in [1, 3]");
  }
  if (cfg.search_pool < 0) throw UsageError("search_pool must be >= 0");
  for (const auto& [kind, fields] : cfg.editable_fields) {
    if (fields.empty()) {
      throw UsageError("editable_fields for " +
                       std::string(TaskKindName(kind)) + " is empty");
    }
    const auto& known = FieldNames(kind);
    for (const auto& f : fields) {
      if (std::find(known.begin(), known.end(), f) == known.end()) {
        throw UsageError("unknown editable field '" + f + "' for " +
                         std::string(TaskKindName(kind)));
      }
      if (kind == TaskKind::kMultiChoiceQa && f != "question") {
        throw UsageError("answer choices are not editable");
      }
    }
  }
}

Json EditorConfigToJson(const EditorConfig& cfg) {
  Json j;
  j["n_positions"] = cfg.n_positions;
  j["n_candidates"] = cfg.n_candidates;
  j["max_insert_len"] = cfg.max_insert_len;
  j["target_mode"] = TargetModeName(cfg.target_mode);
  j["search_pool"] = cfg.search_pool;
  Json fields = Json::object();
  for (const auto& [kind, names] : cfg.editable_fields) {
    fields[std::string(TaskKindName(kind))] = names;
  }
  j["editable_fields"] = std::move(fields);
  return j;
}

EditorConfig EditorConfigFromJson(const Json& j, const EditorConfig& base) {
  if (!j.is_object()) throw UsageError("editor config must be an object");
  EditorConfig cfg = base;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_positions") {
        cfg.n_positions = value.get<int>();
      } else if (key == "n_candidates") {
        cfg.n_candidates = value.get<int>();
      } else if (key == "max_insert_len") {
        cfg.max_insert_len = value.get<int>();
      } else if (key == "target_mode") {
        cfg.target_mode = ParseTargetMode(value.get<std::string>());
      } else if (key == "search_pool") {
        cfg.search_pool = value.get<int>();
      } else if (key == "editable_fields") {
        cfg.editable_fields.clear();
        for (const auto& [task, names] : value.items()) {
          cfg.editable_fields[ParseTaskKind(task)] =
              names.get<std::vector<std::string>>();
        }
      } else {
        throw UsageError("unknown editor config key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw UsageError(std::string("malformed editor config: ") + e.what());
  }
  ValidateEditorConfig(cfg);
  return cfg;
}

Json InterventionToJson(const Intervention& iv) {
  Json j;
  j["instance_id"] = iv.instance_id;
  j["field_name"] = iv.field_name;
  j["token_index"] = iv.token_index;
  j["words"] = iv.words;
  j["target_label"] = iv.target_label ? Json(*iv.target_label) : Json(nullptr);
  j["provenance"] = ProvenanceName(iv.provenance);
  j["site_kind"] =
      iv.site_kind ? Json(SiteKindName(*iv.site_kind)) : Json(nullptr);
  return j;
}

Intervention InterventionFromJson(const Json& j) {
  if (!j.is_object()) throw DataError("intervention must be an object");
  Intervention iv;
  try {
    iv.instance_id = j.at("instance_id").get<std::string>();
    iv.field_name = j.at("field_name").get<std::string>();
    iv.token_index = j.at("token_index").get<size_t>();
    iv.words = j.at("words").get<std::vector<std::string>>();
    const Json target = j.value("target_label", Json(nullptr));
    if (!target.is_null()) iv.target_label = CanonicalLabel(target.get<std::string>());
    iv.provenance =
        ParseProvenance(j.value("provenance", std::string("external")));
    const Json site = j.value("site_kind", Json(nullptr));
    if (!site.is_null()) {
      const std::string s = site.get<std::string>();
      if (s == "before-noun") {
        iv.site_kind = SiteKind::kBeforeNoun;
      } else if (s == "before-verb") {
        iv.site_kind = SiteKind::kBeforeVerb;
      } else {
        throw DataError("unknown site_kind '" + s + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed intervention: ") + e.what());
  }
  return iv;
}

void ValidateIntervention(const Instance& instance, const Intervention& iv) {
  const std::string where = "intervention on '" + instance.id + "'";
  if (iv.instance_id != instance.id) {
    throw DataError(where + " names instance '" + iv.instance_id + "'");
  }
  if (iv.words.empty() || iv.words.size() > 3) {
    throw DataError(where + " must insert 1 to 3 words");
  }
  if (instance.task == TaskKind::kMultiChoiceQa && iv.field_name != "question") {
    throw DataError(where + ": answer choices are not editable");
  }
  const std::string* text = instance.Field(iv.field_name);
  if (text == nullptr) {
    throw DataError(where + ": unknown field '" + iv.field_name + "'");
  }
  Tokens tokens = Tokenize(*text);
  if (iv.token_index >= tokens.size()) {
    throw DataError(where + ": token index " + std::to_string(iv.token_index) +
                    " out of range for " + std::to_string(tokens.size()) +
                    " tokens");
  }
  auto forms = tokens.MatchForms();
  for (const auto& w : iv.words) {
    if (w.empty() || std::any_of(w.begin(), w.end(), IsAsciiSpace)) {
      throw DataError(where + ": word '" + w + "' is not a single token");
    }
    const std::string form = MatchForm(w);
    if (form.empty()) {
      throw DataError(where + ": word '" + w + "' has no letters or digits");
    }
    if (forms.count(form)) {
      throw DataError(where + ": word '" + w + "' already occurs in " +
                      iv.field_name);
    }
  }
  if (iv.target_label &&
      std::find(instance.label_set.begin(), instance.label_set.end(),
                *iv.target_label) == instance.label_set.end()) {
    throw DataError(where + ": target label '" + *iv.target_label +
                    "' is outside the label set");
  }
}

namespace {

std::string InsertedSpan(const Intervention& iv) {
  return Join(iv.words, " ") + " ";
}

}  // namespace

Instance ApplyIntervention(const Instance& instance, const Intervention& iv) {
  ValidateIntervention(instance, iv);
  Instance out = instance;
  std::string* text = out.MutableField(iv.field_name);
  const size_t offset = Tokenize(*text)[iv.token_index].offset;
  text->insert(offset, InsertedSpan(iv));
  return out;
}

Instance RemoveIntervention(const Instance& perturbed, const Intervention& iv) {
  Instance out = perturbed;
  std::string* text = out.MutableField(iv.field_name);
  if (text == nullptr) {
    throw DataError("unknown field '" + iv.field_name + "'");
  }
  Tokens tokens = Tokenize(*text);
  const std::string span = InsertedSpan(iv);
  if (iv.token_index >= tokens.size() ||
      text->compare(tokens[iv.token_index].offset, span.size(), span) != 0) {
    throw DataError("inserted words not found in '" + iv.field_name + "'");
  }
  text->erase(tokens[iv.token_index].offset, span.size());
  return out;
}

bool Overlap(const std::vector<std::string>& words, std::string_view nle) {
  auto forms = Tokenize(nle).MatchForms();
  for (const auto& w : words) {
    const std::string form = MatchForm(w);
    if (!form.empty() && forms.count(form)) return true;
  }
  return false;
}

namespace {

std::vector<std::string> TargetLabels(const Instance& instance,
                                      const std::string& original_label) {
  std::vector<std::string> out;
  for (const auto& l : instance.label_set) {
    if (l != original_label) out.push_back(l);
  }
  return out;
}

std::vector<Intervention> ExpandTargets(std::vector<Intervention> base,
                                        const Instance& instance,
                                        const std::string& original_label) {
  std::vector<Intervention> out;
  for (const auto& target : TargetLabels(instance, original_label)) {
    for (Intervention iv : base) {
      iv.target_label = target;
      out.push_back(std::move(iv));
    }
  }
  return out;
}

}  // namespace

std::vector<Intervention> RandomInterventions(
    const Instance& instance, const Lexicon& lex, const EditorConfig& cfg,
    const std::string& original_label) {
  ValidateEditorConfig(cfg);
  std::vector<InsertionSite> sites;
  for (const auto& field : cfg.FieldsFor(instance.task)) {
    if (instance.Field(field) == nullptr) continue;
    auto found = FindSites(instance, field, lex);
    sites.insert(sites.end(), found.begin(), found.end());
  }
  std::vector<Intervention> out;
  if (sites.empty()) return out;
  // Sites sharing a gap (a token tagged both NOUN and VERB) form one position.
  std::vector<std::vector<InsertionSite>> gaps;
  for (const auto& site : sites) {
    if (!gaps.empty() && gaps.back()[0].field_name == site.field_name &&
        gaps.back()[0].token_index == site.token_index) {
      gaps.back().push_back(site);
    } else {
      gaps.push_back({site});
    }
  }
  Rng rng(DeriveSeed(cfg.seed, instance.id));
  std::vector<size_t> chosen =
      rng.SampleIndices(gaps.size(), static_cast<size_t>(cfg.n_positions));
  for (size_t idx : chosen) {
    const auto& options = gaps[idx];
    const InsertionSite& site =
        options.size() == 1 ? options[0] : options[rng.Below(options.size())];
    auto exclude = Tokenize(instance.FieldOrThrow(site.field_name)).MatchForms();
    WordKind kind =
        site.kind == SiteKind::kBeforeNoun ? WordKind::kAdj : WordKind::kAdv;
    for (auto& w : SampleWords(lex, kind, static_cast<size_t>(cfg.n_candidates),
                               rng, &exclude)) {
      Intervention iv;
      iv.instance_id = instance.id;
      iv.field_name = site.field_name;
      iv.token_index = site.token_index;
      iv.words = {std::move(w)};
      iv.provenance = Provenance::kRand;
      iv.site_kind = site.kind;
      ValidateIntervention(instance, iv);
      out.push_back(std::move(iv));
    }
  }
  if (cfg.target_mode == TargetMode::kPerTargetLabel) {
    return ExpandTargets(std::move(out), instance, original_label);
  }
  return out;
}

std::vector<Phrase> BuildSearchVocabulary(const Lexicon& lex,
                                          const Dataset& dataset,
                                          size_t top_k) {
  std::vector<Phrase> vocab;
  std::unordered_set<std::string> seen;
  for (const auto* list : {&lex.adjectives(), &lex.adverbs()}) {
    for (const auto& w : *list) {
      if (seen.insert(w).second) vocab.push_back({w});
    }
  }
  if (top_k == 0) return vocab;
  std::unordered_map<std::string, size_t> counts;
  for (const Instance& inst : dataset.instances) {
    for (const auto& [name, text] : inst.fields) {
      for (const Token& t : Tokenize(text).tokens) {
        if (t.match_form.empty() || seen.count(t.match_form)) continue;
        PosSet tags = lex.Tags(t.match_form);
        if (tags.Has(Pos::kNoun) || tags.Has(Pos::kVerb) ||
            tags.Has(Pos::kAdj) || tags.Has(Pos::kAdv)) {
          ++counts[t.match_form];
        }
      }
    }
  }
  std::vector<std::pair<std::string, size_t>> ranked(counts.begin(),
                                                     counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  for (size_t i = 0; i < ranked.size() && i < top_k; ++i) {
    vocab.push_back({ranked[i].first});
  }
  return vocab;
}

std::vector<Phrase> LoadVocabulary(const std::string& path) {
  std::string text = ReadFile(path);
  std::vector<Phrase> vocab;
  std::unordered_set<std::string> seen;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    Phrase phrase = SplitWhitespace(line);
    if (phrase.empty()) continue;
    if (phrase.size() > 3) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": vocabulary entries have at most 3 words");
    }
    if (seen.insert(Join(phrase, " ")).second) vocab.push_back(std::move(phrase));
  }
  if (vocab.empty()) throw DataError(path + ": vocabulary is empty");
  return vocab;
}

namespace {

struct Gap {
  std::string field;
  size_t token_index;
};

struct Scored {
  double score;
  std::string key;  // phrase joined by spaces
  size_t gap_rank;
  size_t vocab_index;
  const Phrase* phrase;
  const Gap* gap;
};

bool Eligible(const Phrase& phrase, const std::unordered_set<std::string>& forms,
              int max_len) {
  if (phrase.empty() || phrase.size() > static_cast<size_t>(max_len)) {
    return false;
  }
  for (const auto& w : phrase) {
    const std::string f = MatchForm(w);
    if (f.empty() || forms.count(f)) return false;
  }
  return true;
}

}  // namespace

std::vector<Intervention> SearchInterventions(const Instance& instance,
                                              const std::vector<Phrase>& vocab,
                                              const EditorConfig& cfg,
                                              Endpoint& endpoint,
                                              const ModelOutput& original) {
  ValidateEditorConfig(cfg);
  if (vocab.empty()) throw DataError("search vocabulary is empty");
  std::vector<Gap> gaps;
  for (const auto& field : cfg.FieldsFor(instance.task)) {
    const std::string* text = instance.Field(field);
    if (text == nullptr) continue;
    size_t n = Tokenize(*text).size();
    for (size_t i = 0; i < n; ++i) gaps.push_back({field, i});
  }
  std::vector<Intervention> out;
  if (gaps.empty()) return out;

  Rng rng(DeriveSeed(cfg.seed, "edit\x1f" + instance.id));
  std::vector<size_t> chosen =
      rng.SampleIndices(gaps.size(), static_cast<size_t>(cfg.n_positions));
  const bool scored = original.label_scores.has_value();
  const bool per_target = cfg.target_mode == TargetMode::kPerTargetLabel;
  const std::vector<std::string> targets =
      per_target ? TargetLabels(instance, original.label)
                 : std::vector<std::string>{std::string()};

  // candidates[t] collects the kept candidates for target t.
  std::vector<std::vector<Scored>> candidates(targets.size());
  for (size_t rank = 0; rank < chosen.size(); ++rank) {
    const Gap& gap = gaps[chosen[rank]];
    auto forms = Tokenize(instance.FieldOrThrow(gap.field)).MatchForms();
    std::vector<size_t> eligible;
    for (size_t v = 0; v < vocab.size(); ++v) {
      if (Eligible(vocab[v], forms, cfg.max_insert_len)) eligible.push_back(v);
    }
    if (cfg.search_pool > 0 &&
        eligible.size() > static_cast<size_t>(cfg.search_pool)) {
      std::vector<size_t> pick = rng.SampleIndices(
          eligible.size(), static_cast<size_t>(cfg.search_pool));
      std::sort(pick.begin(), pick.end());
      std::vector<size_t> pool;
      for (size_t p : pick) pool.push_back(eligible[p]);
      eligible = std::move(pool);
    }
    std::vector<std::optional<LabelScores>> scores(eligible.size());
    if (scored) {
      for (size_t e = 0; e < eligible.size(); ++e) {
        Intervention probe;
        probe.instance_id = instance.id;
        probe.field_name = gap.field;
        probe.token_index = gap.token_index;
        probe.words = vocab[eligible[e]];
        scores[e] = endpoint.Predict(ApplyIntervention(instance, probe))
                        .label_scores;
        if (!scores[e]) {
          throw ConformanceError("predict omitted scores for '" + instance.id +
                                 "' although infer returned them");
        }
      }
    }
    for (size_t t = 0; t < targets.size(); ++t) {
      std::vector<Scored> local;
      for (size_t e = 0; e < eligible.size(); ++e) {
        double s = 0.0;
        if (scored) {
          if (per_target) {
            auto it = scores[e]->find(targets[t]);
            s = it == scores[e]->end() ? 0.0 : it->second;
          } else {
            s = MassOffLabel(*scores[e], original.label);
          }
        }
        const Phrase& phrase = vocab[eligible[e]];
        local.push_back({s, Join(phrase, " "), rank, eligible[e], &phrase, &gap});
      }
      if (scored) {
        std::stable_sort(local.begin(), local.end(),
                         [](const Scored& a, const Scored& b) {
                           if (a.score != b.score) return a.score > b.score;
                           return a.key < b.key;
                         });
      }
      if (local.size() > static_cast<size_t>(cfg.n_candidates)) {
        local.resize(static_cast<size_t>(cfg.n_candidates));
      }
      candidates[t].insert(candidates[t].end(), local.begin(), local.end());
    }
  }

  for (size_t t = 0; t < targets.size(); ++t) {
    auto& list = candidates[t];
    std::stable_sort(list.begin(), list.end(),
                     [scored](const Scored& a, const Scored& b) {
                       if (scored) {
                         if (a.score != b.score) return a.score > b.score;
                         if (a.key != b.key) return a.key < b.key;
                         return a.gap_rank < b.gap_rank;
                       }
                       if (a.vocab_index != b.vocab_index) {
                         return a.vocab_index < b.vocab_index;
                       }
                       return a.gap_rank < b.gap_rank;
                     });
    for (const Scored& c : list) {
      Intervention iv;
      iv.instance_id = instance.id;
      iv.field_name = c.gap->field;
      iv.token_index = c.gap->token_index;
      iv.words = *c.phrase;
      if (per_target) iv.target_label = targets[t];
      iv.provenance = Provenance::kEdit;
      out.push_back(std::move(iv));
    }
  }
  return out;
}

namespace {

Json OptionalString(const std::optional<std::string>& s) {
  return s ? Json(*s) : Json(nullptr);
}

}  // namespace

Json CounterfactualRecordToJson(const CounterfactualRecord& r) {
  Json j;
  j["schema"] = kCounterfactualSchema;
  j["instance_id"] = r.instance_id;
  j["provenance"] = ProvenanceName(r.provenance);
  j["original"] = r.errored && r.original.label.empty()
                      ? Json(nullptr)
                      : ModelOutputToJson(r.original);
  if (r.intervention && r.perturbed_output) {
    Json chosen;
    chosen["intervention"] = InterventionToJson(*r.intervention);
    chosen["perturbed_output"] = ModelOutputToJson(*r.perturbed_output);
    j["chosen"] = std::move(chosen);
  } else {
    j["chosen"] = nullptr;
  }
  j["flipped"] = r.flipped;
  j["overlap"] = r.overlap;
  j["unfaithful"] = r.unfaithful;
  j["trials"] = r.trials;
  j["n_interventions"] = r.n_interventions;
  j["errored"] = r.errored;
  j["error"] = r.errored ? Json(r.error) : Json(nullptr);
  j["paraphrase_present"] = OptionalString(r.paraphrase_present);
  return j;
}

CounterfactualRecord CounterfactualRecordFromJson(const Json& j) {
  if (!j.is_object()) throw DataError("counterfactual record must be an object");
  CounterfactualRecord r;
  try {
    if (j.value("schema", std::string()) != kCounterfactualSchema) {
      throw DataError("unsupported counterfactual record schema");
    }
    r.instance_id = j.at("instance_id").get<std::string>();
    r.provenance = ParseProvenance(j.at("provenance").get<std::string>());
    if (!j.at("original").is_null()) {
      r.original = ModelOutputFromJson(j["original"]);
    }
    if (!j.at("chosen").is_null()) {
      r.intervention = InterventionFromJson(j["chosen"].at("intervention"));
      r.perturbed_output = ModelOutputFromJson(j["chosen"].at("perturbed_output"));
    }
    r.flipped = j.at("flipped").get<bool>();
    r.overlap = j.at("overlap").get<bool>();
    r.unfaithful = j.at("unfaithful").get<bool>();
    r.trials = j.at("trials").get<size_t>();
    r.n_interventions = j.value("n_interventions", size_t{0});
    r.errored = j.value("errored", false);
    if (r.errored) r.error = j.value("error", std::string());
    const Json para = j.value("paraphrase_present", Json(nullptr));
    if (!para.is_null()) r.paraphrase_present = para.get<std::string>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed counterfactual record: ") + e.what());
  }
  if (r.unfaithful && !r.flipped) {
    throw DataError("record '" + r.instance_id + "' is unfaithful but not flipped");
  }
  if (r.flipped != r.intervention.has_value()) {
    throw DataError("record '" + r.instance_id +
                    "' must carry an intervention iff flipped");
  }
  return r;
}

CounterfactualRecord RunCounterfactual(
    const Instance& instance, const ModelOutput& original,
    const std::vector<Intervention>& interventions, Endpoint& endpoint,
    Provenance provenance) {
  CounterfactualRecord rec;
  rec.instance_id = instance.id;
  rec.provenance = provenance;
  rec.original = original;
  rec.n_interventions = interventions.size();
  try {
    for (size_t i = 0; i < interventions.size(); ++i) {
      const Intervention& iv = interventions[i];
      Instance perturbed = ApplyIntervention(instance, iv);
      Prediction p = endpoint.Predict(perturbed);
      ++rec.trials;
      if (p.label == original.label) continue;
      if (iv.target_label && p.label != *iv.target_label) continue;
      ModelOutput out = endpoint.Infer(perturbed);
      ++rec.trials;
      if (out.label != p.label) {
        throw ConformanceError("predict and infer disagree on a perturbed '" +
                               instance.id + "'");
      }
      rec.flipped = true;
      rec.intervention = iv;
      rec.overlap = Overlap(iv.words, out.nle);
      rec.unfaithful = !rec.overlap;
      rec.perturbed_output = std::move(out);
      break;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kTransport) throw;
    CounterfactualRecord err;
    err.instance_id = instance.id;
    err.provenance = provenance;
    err.original = original;
    err.n_interventions = interventions.size();
    err.errored = true;
    err.error = e.what();
    return err;
  }
  return rec;
}

std::vector<Intervention> LoadInterventions(const std::string& path) {
  std::string text = ReadFile(path);
  std::vector<Intervention> out;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = std::string_view(text).substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (TrimWhitespace(line).empty()) continue;
    try {
      Intervention iv = InterventionFromJson(Json::parse(line));
      iv.provenance = Provenance::kExternal;
      out.push_back(std::move(iv));
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string SerializeRecords(const std::vector<CounterfactualRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += CounterfactualRecordToJson(r).dump(-1, ' ', false,
                                              Json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

std::vector<CounterfactualRecord> LoadCounterfactualRecords(
    const std::string& path) {
  std::string text = ReadFile(path);
  std::vector<CounterfactualRecord> out;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = std::string_view(text).substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (TrimWhitespace(line).empty()) continue;
    try {
      out.push_back(CounterfactualRecordFromJson(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace nlefaith
