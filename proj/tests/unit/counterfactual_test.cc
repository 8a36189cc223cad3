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

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "nlefaith/error.h"
#include "nlefaith/mock_model.h"
#include "nlefaith/rng.h"
#include "nlefaith/text.h"
#include "nlefaith/transport.h"
#include "test_util.h"

namespace nlefaith {
namespace {

using ::nlefaith::testing::MakeComve;
using ::nlefaith::testing::MakeNli;
using ::nlefaith::testing::MakeQa;
using ::nlefaith::testing::ScratchDir;
using ::nlefaith::testing::ShippedLexicon;

Instance Row1() {
  return MakeNli("g-row1",
                 "Man in a black suit, white shirt and black bowtie playing an "
                 "instrument with the rest of his symphony surrounding him.",
                 "A tall person in a suit.");
}

Intervention Insert(const Instance& inst, std::string field, size_t index,
                    std::vector<std::string> words) {
  Intervention iv;
  iv.instance_id = inst.id;
  iv.field_name = std::move(field);
  iv.token_index = index;
  iv.words = std::move(words);
  return iv;
}

MockModel BlueModel(MockScores scores = MockScores::kOneHot) {
  MockConfig cfg;
  cfg.scores = scores;
  return MockModel({TokenPresentRule("hypothesis", "blue", "contradiction",
                                     "A man is not a tall person."),
                    TokenPresentRule("hypothesis", "navy", "contradiction",
                                     "A navy suit is not a suit."),
                    AlwaysRule("neutral", "Not all men are tall.")},
                   cfg);
}

TEST(ApplyInterventionTest, InsertsBeforeToken) {
  Instance inst = Row1();
  Instance out = ApplyIntervention(inst, Insert(inst, "hypothesis", 5, {"blue"}));
  EXPECT_EQ(*out.Field("hypothesis"), "A tall person in a blue suit.");
  EXPECT_EQ(*out.Field("premise"), *inst.Field("premise"));
}

TEST(ApplyInterventionTest, IndexZeroPrefixesAndMultiWordSplices) {
  Instance inst = Row1();
  Instance out =
      ApplyIntervention(inst, Insert(inst, "hypothesis", 0, {"Rather", "oddly"}));
  EXPECT_EQ(*out.Field("hypothesis"), "Rather oddly A tall person in a suit.");
  EXPECT_EQ(Tokenize(*out.Field("hypothesis")).size(), 8u);
}

TEST(ApplyInterventionTest, InvalidInterventionsRejected) {
  Instance inst = Row1();
  EXPECT_THROW(ApplyIntervention(inst, Insert(inst, "hypothesis", 1, {})), Error);
  EXPECT_THROW(ApplyIntervention(inst, Insert(inst, "hypothesis", 6, {"blue"})),
               Error);
  EXPECT_THROW(ApplyIntervention(inst, Insert(inst, "hypothesis", 1, {"Suit"})),
               Error);
  EXPECT_THROW(ApplyIntervention(inst, Insert(inst, "question", 1, {"blue"})),
               Error);
  EXPECT_THROW(ApplyIntervention(inst, Insert(inst, "hypothesis", 1, {"a b"})),
               Error);
  Intervention iv = Insert(inst, "hypothesis", 1, {"blue"});
  iv.target_label = "maybe";
  EXPECT_THROW(ApplyIntervention(inst, iv), Error);
  Instance qa = MakeQa("q", "Where can books be read?", "shelf", "table", "backpack");
  EXPECT_THROW(ApplyIntervention(qa, Insert(qa, "choice1", 0, {"old"})), Error);
}

// Deleting the spliced span restores every byte, including odd spacing.
TEST(ApplyInterventionTest, RemoveIsInverse) {
  const std::vector<std::string> texts = {
      "A tall person in a suit.", "  two  spaces\tand tab ", "x",
      "Many people ... 'HI-POINTE.'"};
  for (const auto& text : texts) {
    Instance inst = MakeNli("x", "p", text);
    size_t n = Tokenize(text).size();
    for (size_t i = 0; i < n; ++i) {
      for (const std::vector<std::string>& w :
           {std::vector<std::string>{"blue"},
            std::vector<std::string>{"so", "very", "oddly"}}) {
        Intervention iv = Insert(inst, "hypothesis", i, w);
        Instance out = ApplyIntervention(inst, iv);
        EXPECT_EQ(Tokenize(*out.Field("hypothesis")).size(), n + w.size());
        EXPECT_EQ(RemoveIntervention(out, iv), inst);
      }
    }
  }
  Instance inst = Row1();
  EXPECT_THROW(RemoveIntervention(inst, Insert(inst, "hypothesis", 5, {"blue"})),
               Error);
}

TEST(OverlapTest, MatchFormComparison) {
  EXPECT_FALSE(Overlap({"blue"}, "A man is not a tall person."));
  EXPECT_TRUE(Overlap({"blue"}, "The suit is blue."));
  EXPECT_TRUE(Overlap({"Blue"}, "blue, indeed"));
  EXPECT_TRUE(Overlap({"so", "many", "times"}, "Many reasons."));
  EXPECT_FALSE(Overlap({"blue"}, "bluest"));
}

TEST(EditorConfigTest, DefaultsAndValidation) {
  EditorConfig r = DefaultRandomConfig();
  EXPECT_EQ(r.n_positions, 4);
  EXPECT_EQ(r.n_candidates, 4);
  EXPECT_EQ(r.max_insert_len, 1);
  EXPECT_EQ(r.target_mode, TargetMode::kAnyFlip);
  EditorConfig s = DefaultSearchConfig();
  EXPECT_EQ(s.max_insert_len, 3);
  EXPECT_EQ(s.target_mode, TargetMode::kPerTargetLabel);
  EXPECT_EQ(r.FieldsFor(TaskKind::kNli), (std::vector<std::string>{"hypothesis"}));
  EXPECT_EQ(r.FieldsFor(TaskKind::kCommonsenseChoice),
            (std::vector<std::string>{"sent1", "sent2"}));
  EditorConfig bad = r;
  bad.max_insert_len = 4;
  EXPECT_THROW(ValidateEditorConfig(bad), Error);
  bad = r;
  bad.n_positions = 0;
  EXPECT_THROW(ValidateEditorConfig(bad), Error);
}

TEST(EditorConfigTest, JsonRoundTripAndUnknownKey) {
  EditorConfig c = DefaultSearchConfig();
  c.n_positions = 2;
  c.editable_fields[TaskKind::kNli] = {"premise", "hypothesis"};
  EditorConfig back = EditorConfigFromJson(EditorConfigToJson(c), DefaultRandomConfig());
  EXPECT_EQ(back.n_positions, 2);
  EXPECT_EQ(back.max_insert_len, 3);
  EXPECT_EQ(back.FieldsFor(TaskKind::kNli),
            (std::vector<std::string>{"premise", "hypothesis"}));
  EXPECT_THROW(EditorConfigFromJson({{"positions", 3}}, c), Error);
}

TEST(RandomInterventionsTest, AdjectivesBeforeNounsOnly) {
  Lexicon lex({"blue", "tall", "red", "green", "odd"}, {"quickly"},
              {{"person", {}}, {"suit", {}}});
  PosSet noun;
  noun.Add(Pos::kNoun);
  Lexicon tagged({"blue", "tall", "red", "green", "odd"}, {"quickly"},
                 {{"person", noun}, {"suit", noun}});
  Instance inst = Row1();
  EXPECT_TRUE(RandomInterventions(inst, lex, DefaultRandomConfig(), "neutral").empty());
  auto ivs = RandomInterventions(inst, tagged, DefaultRandomConfig(), "neutral");
  ASSERT_EQ(ivs.size(), 8u);
  for (const auto& iv : ivs) {
    EXPECT_EQ(iv.site_kind, SiteKind::kBeforeNoun);
    EXPECT_TRUE(iv.token_index == 2 || iv.token_index == 5);
    EXPECT_NE(iv.words[0], "tall");
    EXPECT_TRUE(tagged.Contains(WordKind::kAdj, iv.words[0]));
    EXPECT_EQ(iv.provenance, Provenance::kRand);
  }
  EXPECT_EQ(ivs, RandomInterventions(inst, tagged, DefaultRandomConfig(), "neutral"));
}

TEST(RandomInterventionsTest, AmbiguousTokenIsOnePosition) {
  PosSet both;
  both.Add(Pos::kNoun);
  both.Add(Pos::kVerb);
  Lexicon lex({"blue", "tall", "red", "green", "odd"},
              {"quickly", "slowly", "gladly", "rarely", "often"}, {{"dance", both}});
  std::set<SiteKind> kinds;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    EditorConfig cfg = DefaultRandomConfig();
    cfg.seed = seed;
    auto ivs = RandomInterventions(MakeNli("d", "p", "They dance."), lex, cfg, "neutral");
    ASSERT_EQ(ivs.size(), 4u);
    for (const auto& iv : ivs) {
      EXPECT_EQ(iv.token_index, 1u);
      EXPECT_EQ(iv.site_kind, ivs[0].site_kind);
    }
    kinds.insert(*ivs[0].site_kind);
  }
  EXPECT_EQ(kinds.size(), 2u);
}

TEST(RandomInterventionsTest, SeedAndInstanceIdDriveTheDraw) {
  const Lexicon& lex = ShippedLexicon();
  Instance inst = MakeNli("a", "p", "The old man is walking his dog in the park.");
  EditorConfig cfg = DefaultRandomConfig();
  auto base = RandomInterventions(inst, lex, cfg, "neutral");
  ASSERT_EQ(base.size(), 16u);
  cfg.seed = 1;
  EXPECT_NE(base, RandomInterventions(inst, lex, cfg, "neutral"));
  cfg.seed = 0;
  inst.id = "b";
  EXPECT_NE(RandomInterventions(inst, lex, cfg, "neutral")[0].words,
            base[0].words);
}

TEST(RandomInterventionsTest, PerTargetRepeatsForEachOtherLabel) {
  EditorConfig cfg = DefaultRandomConfig();
  cfg.target_mode = TargetMode::kPerTargetLabel;
  cfg.n_positions = 1;
  cfg.n_candidates = 2;
  auto ivs = RandomInterventions(Row1(), ShippedLexicon(), cfg, "neutral");
  ASSERT_EQ(ivs.size(), 4u);
  EXPECT_EQ(ivs[0].target_label, "entailment");
  EXPECT_EQ(ivs[2].target_label, "contradiction");
  EXPECT_EQ(ivs[0].words, ivs[2].words);
}

TEST(SearchInterventionsTest, FlippingWordRankedFirst) {
  auto ep = MakeMockEndpoint(BlueModel());
  Instance inst = Row1();
  ModelOutput orig = ep->Infer(inst);
  std::vector<Phrase> vocab = {{"red"}, {"blue"}, {"green"}};
  EditorConfig cfg = DefaultSearchConfig();
  cfg.target_mode = TargetMode::kAnyFlip;
  auto ivs = SearchInterventions(inst, vocab, cfg, *ep, orig);
  ASSERT_FALSE(ivs.empty());
  EXPECT_EQ(ivs[0].words, Phrase{"blue"});
  EXPECT_EQ(ivs[0].provenance, Provenance::kEdit);
}

TEST(SearchInterventionsTest, PerTargetOrdersByTargetLabel) {
  auto ep = MakeMockEndpoint(BlueModel());
  Instance inst = Row1();
  ModelOutput orig = ep->Infer(inst);
  auto ivs = SearchInterventions(inst, {{"red"}, {"blue"}}, DefaultSearchConfig(),
                                 *ep, orig);
  ASSERT_EQ(ivs.size(), 16u);
  EXPECT_EQ(ivs.front().target_label, "entailment");
  EXPECT_EQ(ivs.back().target_label, "contradiction");
  EXPECT_EQ(ivs[8].words, Phrase{"blue"});
}

TEST(SearchInterventionsTest, WithoutScoresUsesVocabularyOrder) {
  auto ep = MakeMockEndpoint(BlueModel(MockScores::kNone));
  Instance inst = Row1();
  ModelOutput orig = ep->Infer(inst);
  EditorConfig cfg = DefaultSearchConfig();
  cfg.target_mode = TargetMode::kAnyFlip;
  auto ivs = SearchInterventions(inst, {{"red"}, {"blue"}, {"suit"}}, cfg, *ep, orig);
  ASSERT_EQ(ivs.size(), 8u);
  for (size_t i = 0; i < 4; ++i) EXPECT_EQ(ivs[i].words, Phrase{"red"});
  for (size_t i = 4; i < 8; ++i) EXPECT_EQ(ivs[i].words, Phrase{"blue"});
}

TEST(SearchInterventionsTest, BudgetOneByOneGivesOne) {
  auto ep = MakeMockEndpoint(BlueModel());
  Instance inst = Row1();
  EditorConfig cfg = DefaultSearchConfig();
  cfg.target_mode = TargetMode::kAnyFlip;
  cfg.n_positions = 1;
  cfg.n_candidates = 1;
  EXPECT_EQ(SearchInterventions(inst, {{"red"}, {"blue"}}, cfg, *ep, ep->Infer(inst))
                .size(),
            1u);
}

TEST(SearchInterventionsTest, PhrasesRespectLengthAndInputWords) {
  auto ep = MakeMockEndpoint(BlueModel());
  Instance inst = Row1();
  EditorConfig cfg = DefaultSearchConfig();
  cfg.max_insert_len = 2;
  std::vector<Phrase> vocab = {{"so", "many", "times"}, {"a", "bit"}, {"very"}};
  for (const auto& iv : SearchInterventions(inst, vocab, cfg, *ep, ep->Infer(inst))) {
    EXPECT_EQ(iv.words, Phrase{"very"});
  }
}

TEST(RunCounterfactualTest, GoldenRowOneIsUnfaithful) {
  auto ep = MakeMockEndpoint(BlueModel());
  Instance inst = Row1();
  ModelOutput orig = ep->Infer(inst);
  ASSERT_EQ(orig.label, "neutral");
  ASSERT_EQ(orig.nle, "Not all men are tall.");
  std::vector<Intervention> ivs = {Insert(inst, "hypothesis", 2, {"red"}),
                                   Insert(inst, "hypothesis", 5, {"blue"}),
                                   Insert(inst, "hypothesis", 5, {"navy"})};
  CounterfactualRecord r = RunCounterfactual(inst, orig, ivs, *ep, Provenance::kExternal);
  EXPECT_TRUE(r.flipped);
  EXPECT_FALSE(r.overlap);
  EXPECT_TRUE(r.unfaithful);
  EXPECT_EQ(r.intervention->words, Phrase{"blue"});
  EXPECT_EQ(r.perturbed_output->label, "contradiction");
  EXPECT_EQ(r.perturbed_output->nle, "A man is not a tall person.");
  EXPECT_EQ(r.trials, 3u);
  EXPECT_EQ(r.n_interventions, 3u);
}

TEST(RunCounterfactualTest, OverlapMakesFlipFaithful) {
  auto ep = MakeMockEndpoint(BlueModel());
  Instance inst = Row1();
  CounterfactualRecord r =
      RunCounterfactual(inst, ep->Infer(inst), {Insert(inst, "hypothesis", 5, {"navy"})},
                        *ep, Provenance::kExternal);
  EXPECT_TRUE(r.flipped);
  EXPECT_TRUE(r.overlap);
  EXPECT_FALSE(r.unfaithful);
}

TEST(RunCounterfactualTest, EmptyListAndTargetMismatch) {
  auto ep = MakeMockEndpoint(BlueModel());
  Instance inst = Row1();
  ModelOutput orig = ep->Infer(inst);
  CounterfactualRecord none = RunCounterfactual(inst, orig, {}, *ep, Provenance::kRand);
  EXPECT_FALSE(none.flipped);
  EXPECT_FALSE(none.unfaithful);
  EXPECT_FALSE(none.intervention.has_value());
  Intervention iv = Insert(inst, "hypothesis", 5, {"blue"});
  iv.target_label = "entailment";
  EXPECT_FALSE(RunCounterfactual(inst, orig, {iv}, *ep, Provenance::kEdit).flipped);
}

TEST(RunCounterfactualTest, TransportFailureGivesErroredRecord) {
  Instance inst = Row1();
  ProtocolEndpoint ep(std::make_unique<FunctionTransport>([](const Json& req) -> Json {
    if (req["op"] == "handshake") {
      Capabilities caps;
      caps.deterministic = true;
      return {{"id", req["id"]}, {"capabilities", CapabilitiesToJson(caps)}};
    }
    throw TransportError("connection reset");
  }), 0);
  ModelOutput orig{"neutral", "n", std::nullopt};
  CounterfactualRecord r = RunCounterfactual(
      inst, orig, {Insert(inst, "hypothesis", 5, {"blue"})}, ep, Provenance::kRand);
  EXPECT_TRUE(r.errored);
  EXPECT_FALSE(r.flipped);
  EXPECT_NE(r.error.find("connection reset"), std::string::npos);
}

// Exhaustive search on a tiny setting must pick the same flip a brute-force
// scan over (gap, word) in the same order would.
TEST(RunCounterfactualTest, ExhaustiveSearchMatchesBruteForceFirstFlip) {
  MockConfig cfg;
  cfg.scores = MockScores::kNone;
  auto ep = MakeMockEndpoint(MockModel(
      {TokenPresentRule("hypothesis", "red dog", "entailment", "e"),
       TokenPresentRule("hypothesis", "blue", "contradiction", "c"),
       AlwaysRule("neutral", "n")},
      cfg));
  Instance inst = MakeNli("tiny", "p", "small dog");
  EditorConfig ec = DefaultSearchConfig();
  ec.target_mode = TargetMode::kAnyFlip;
  ec.n_positions = 2;
  ec.n_candidates = 2;
  ec.search_pool = 0;
  std::vector<Phrase> vocab = {{"blue"}, {"red"}};
  ModelOutput orig = ep->Infer(inst);
  auto ivs = SearchInterventions(inst, vocab, ec, *ep, orig);
  ASSERT_EQ(ivs.size(), 4u);
  CounterfactualRecord r = RunCounterfactual(inst, orig, ivs, *ep, Provenance::kEdit);

  std::optional<std::pair<size_t, std::string>> first;
  for (const auto& iv : ivs) {
    std::vector<std::string> toks = {"small", "dog"};
    toks.insert(toks.begin() + static_cast<long>(iv.token_index), iv.words[0]);
    std::string text = Join(toks, " ");
    bool flips = text.find("blue") != std::string::npos ||
                 text.find("red dog") != std::string::npos;
    if (flips) {
      first = {iv.token_index, iv.words[0]};
      break;
    }
  }
  ASSERT_TRUE(first.has_value());
  ASSERT_TRUE(r.flipped);
  EXPECT_EQ(r.intervention->token_index, first->first);
  EXPECT_EQ(r.intervention->words[0], first->second);
}

TEST(RecordJsonTest, RoundTripAndInvariants) {
  auto ep = MakeMockEndpoint(BlueModel());
  Instance inst = Row1();
  CounterfactualRecord r =
      RunCounterfactual(inst, ep->Infer(inst), {Insert(inst, "hypothesis", 5, {"blue"})},
                        *ep, Provenance::kExternal);
  r.intervention->provenance = Provenance::kExternal;
  Json j = CounterfactualRecordToJson(r);
  EXPECT_EQ(j["schema"], kCounterfactualSchema);
  EXPECT_EQ(CounterfactualRecordFromJson(j), r);
  Json bad = j;
  bad["flipped"] = false;
  EXPECT_THROW(CounterfactualRecordFromJson(bad), Error);
  bad = j;
  bad["schema"] = "other/9";
  EXPECT_THROW(CounterfactualRecordFromJson(bad), Error);
}

TEST(RecordJsonTest, SerializeThenLoad) {
  std::string dir = ScratchDir("cf_records");
  auto ep = MakeMockEndpoint(BlueModel());
  Instance a = Row1();
  Instance b = MakeNli("b", "p", "A blue car.");
  std::vector<CounterfactualRecord> recs = {
      RunCounterfactual(a, ep->Infer(a), {Insert(a, "hypothesis", 5, {"blue"})}, *ep,
                        Provenance::kRand),
      RunCounterfactual(b, ep->Infer(b), {}, *ep, Provenance::kRand)};
  std::ofstream(dir + "/r.jsonl") << SerializeRecords(recs);
  EXPECT_EQ(LoadCounterfactualRecords(dir + "/r.jsonl"), recs);
}

TEST(InterventionIoTest, LoadForcesExternalProvenance) {
  std::string dir = ScratchDir("cf_ivs");
  std::ofstream(dir + "/iv.jsonl")
      << R"({"instance_id":"x","field_name":"hypothesis","token_index":5,"words":["blue"],"provenance":"rand"})"
      << "\n\n"
      << R"({"instance_id":"y","field_name":"hypothesis","token_index":0,"words":["so","many"],"target_label":"entailment"})"
      << "\n";
  auto ivs = LoadInterventions(dir + "/iv.jsonl");
  ASSERT_EQ(ivs.size(), 2u);
  EXPECT_EQ(ivs[0].provenance, Provenance::kExternal);
  EXPECT_EQ(ivs[1].target_label, "entailment");
  std::ofstream(dir + "/bad.jsonl") << "{\"instance_id\":\n";
  EXPECT_THROW(LoadInterventions(dir + "/bad.jsonl"), Error);
}

TEST(VocabularyTest, BuildAndLoad) {
  PosSet noun;
  noun.Add(Pos::kNoun);
  Lexicon lex({"blue"}, {"quickly"}, {{"dog", noun}, {"cat", noun}});
  Dataset ds;
  ds.instances = {MakeNli("a", "The dog and the cat.", "A dog."),
                  MakeNli("b", "A blue dog.", "Of.")};
  auto vocab = BuildSearchVocabulary(lex, ds, 5);
  EXPECT_EQ(vocab, (std::vector<Phrase>{{"blue"}, {"quickly"}, {"dog"}, {"cat"}}));
  EXPECT_EQ(BuildSearchVocabulary(lex, ds, 0).size(), 2u);

  std::string dir = ScratchDir("vocab");
  std::ofstream(dir + "/v.txt") << "blue\nso many times\nblue\n\n";
  EXPECT_EQ(LoadVocabulary(dir + "/v.txt"),
            (std::vector<Phrase>{{"blue"}, {"so", "many", "times"}}));
  std::ofstream(dir + "/long.txt") << "a b c d\n";
  EXPECT_THROW(LoadVocabulary(dir + "/long.txt"), Error);
  std::ofstream(dir + "/empty.txt") << "\n";
  EXPECT_THROW(LoadVocabulary(dir + "/empty.txt"), Error);
}

TEST(ComveEditingTest, BothSentencesEditable) {
  Instance inst = MakeComve("c", "Everyone hates paying taxes", "Nobody hates paying taxes");
  auto ivs = RandomInterventions(inst, ShippedLexicon(), DefaultRandomConfig(),
                                 "first sentence");
  std::set<std::string> fields;
  for (const auto& iv : ivs) fields.insert(iv.field_name);
  EXPECT_FALSE(ivs.empty());
  for (const auto& f : fields) EXPECT_TRUE(f == "sent1" || f == "sent2");
}

}  // namespace
}  // namespace nlefaith
