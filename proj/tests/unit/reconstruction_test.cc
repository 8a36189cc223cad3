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

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "nlefaith/error.h"
#include "nlefaith/mock_model.h"
#include "test_util.h"

namespace nlefaith {
namespace {

using ::nlefaith::testing::MakeComve;
using ::nlefaith::testing::MakeNli;
using ::nlefaith::testing::MakeQa;
using ::nlefaith::testing::ScratchDir;
using ::nlefaith::testing::ShippedData;
using ::nlefaith::testing::ShippedLexicon;
using ::nlefaith::testing::TestData;

const std::vector<NleTemplate>& Shipped() {
  static const auto* t = new std::vector<NleTemplate>(
      LoadTemplates(ShippedData("templates/esnli_templates.jsonl")));
  return *t;
}

Instance Row2() {
  return MakeNli("g-row2",
                 "Many people standing outside of a place talking to each other "
                 "in front of a building that has a sign that says 'HI-POINTE.'",
                 "The people are having a chat before going into the work "
                 "building.");
}

TEST(ParseTemplateTest, SlotsAndLiterals) {
  NleTemplate t = ParseTemplate("jb", "just because <X> does not mean <Y>");
  EXPECT_EQ(t.slots, (std::vector<std::string>{"X", "Y"}));
  EXPECT_EQ(t.literals,
            (std::vector<std::string>{"just because ", " does not mean ", ""}));
  EXPECT_EQ(t.LiteralLength(), 28u);
  NleTemplate single = ParseTemplate("one", "<X> is tall");
  EXPECT_EQ(single.slots.size(), 1u);
}

TEST(ParseTemplateTest, RejectsMalformedPatterns) {
  EXPECT_THROW(ParseTemplate("a", "<X><Y>"), Error);
  EXPECT_THROW(ParseTemplate("a", "<X> and <X>"), Error);
  EXPECT_THROW(ParseTemplate("a", "<Z> is <Y>"), Error);
  EXPECT_THROW(ParseTemplate("a", "no slots"), Error);
}

TEST(LoadTemplatesTest, ShippedFileAndDuplicates) {
  const auto& t = Shipped();
  ASSERT_GE(t.size(), 4u);
  bool not_all = false;
  for (const auto& x : t) {
    if (x.pattern == "not all <X> are <Y>") not_all = !x.reconstructable;
  }
  EXPECT_TRUE(not_all);
  EXPECT_THROW(ParseTemplates(R"({"id":"a","pattern":"<X> is <Y>"}
{"id":"a","pattern":"<X> was <Y>"})"),
               Error);
}

TEST(MatchTemplateTest, JustBecauseCaptures) {
  auto m = MatchTemplate(
      "Just because people are talking does not mean they are having a chat.",
      Shipped());
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->x, "people are talking");
  EXPECT_EQ(m->y, "they are having a chat");
  EXPECT_TRUE(m->reconstructable);
}

TEST(MatchTemplateTest, NoMatchCases) {
  EXPECT_FALSE(MatchTemplate("Two women are not three women.",
                             {ParseTemplate("jb", "just because <X> does not mean <Y>")}));
  EXPECT_FALSE(MatchTemplate("Just because does not mean they chat.",
                             {ParseTemplate("jb", "just because <X> does not mean <Y>")}));
  EXPECT_FALSE(MatchTemplate("", Shipped()));
}

TEST(MatchTemplateTest, SameAsPatternAndCaseInsensitivity) {
  auto m = MatchTemplate("A RAGGED costume IS THE SAME AS a disheveled outfit!",
                         Shipped());
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->template_id, "same-as");
  EXPECT_EQ(m->x, "A RAGGED costume");
  EXPECT_EQ(m->y, "a disheveled outfit");
}

TEST(MatchTemplateTest, NotAllIsMatchedButNotReconstructable) {
  auto m = MatchTemplate("Not all ragged costumes are disheveled.", Shipped());
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->template_id, "not-all");
  EXPECT_FALSE(m->reconstructable);
}

TEST(MatchTemplateTest, LongestLiteralWinsAndScopeFilters) {
  std::vector<NleTemplate> ts = {ParseTemplate("short", "<X> is <Y>"),
                                 ParseTemplate("long", "<X> is a rephrasing of <Y>")};
  auto m = MatchTemplate("People are talking is a rephrasing of they chat.", ts);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->template_id, "long");
  ts[1].label_scope = "entailment";
  EXPECT_EQ(MatchTemplate("People are talking is a rephrasing of they chat.", ts,
                          std::string("neutral"))
                ->template_id,
            "short");
  EXPECT_EQ(MatchTemplate("People are talking is a rephrasing of they chat.", ts,
                          std::string("entailment"))
                ->template_id,
            "long");
}

TEST(MatchTemplateTest, MinimalCaptureForX) {
  auto m = MatchTemplate("a is the same as b is the same as c",
                         {ParseTemplate("s", "<X> is the same as <Y>")});
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->x, "a");
  EXPECT_EQ(m->y, "b is the same as c");
}

// Rendering then matching returns the captures for inputs free of literals.
TEST(MatchTemplateTest, RenderMatchRoundTrip) {
  const std::vector<std::string> words = {"dog", "cat", "runs", "blue", "sun",
                                          "tree", "People", "sit"};
  std::mt19937_64 gen(11);
  auto phrase = [&] {
    std::string s;
    size_t n = 1 + gen() % 4;
    for (size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += words[gen() % words.size()];
    }
    return s;
  };
  for (const auto& t : Shipped()) {
    if (t.slots.size() != 2) continue;
    for (int i = 0; i < 200; ++i) {
      std::string x = phrase();
      std::string y = phrase();
      auto m = MatchTemplate(RenderTemplate(t, x, y), Shipped());
      ASSERT_TRUE(m.has_value()) << t.id;
      EXPECT_EQ(m->template_id, t.id);
      EXPECT_EQ(m->x, x);
      EXPECT_EQ(m->y, y);
    }
  }
}

TEST(SentenceLikeTest, ShippedTable) {
  const Lexicon& lex = ShippedLexicon();
  EXPECT_TRUE(IsSentenceLike("people are talking", lex));
  EXPECT_TRUE(IsSentenceLike("they are having a chat", lex));
  EXPECT_FALSE(IsSentenceLike("tall", lex));
  EXPECT_FALSE(IsSentenceLike("", lex));
}

TEST(SentenceCaseTest, CapitalizesAndTerminates) {
  EXPECT_EQ(SentenceCase("people are talking"), "People are talking.");
  EXPECT_EQ(SentenceCase("is it?"), "Is it?");
}

TEST(ReconstructEsnliTest, GoldenRowTwo) {
  EsnliReconstruction r = ReconstructEsnli(
      Row2(), "Just because people are talking does not mean they are having a chat.",
      Shipped(), ShippedLexicon());
  ASSERT_TRUE(r.instance.has_value());
  EXPECT_EQ(*r.instance->Field("premise"), "People are talking.");
  EXPECT_EQ(*r.instance->Field("hypothesis"), "They are having a chat.");
  EXPECT_EQ(r.instance->id, "g-row2");
  EXPECT_FALSE(r.instance->gold_label.has_value());
  EXPECT_NO_THROW(ValidateInstance(*r.instance));
}

TEST(ReconstructEsnliTest, ShowcaseExamples) {
  struct Case {
    std::string nle, premise, hypothesis;
  };
  const std::vector<Case> cases = {
      {"Just because people are riding bicycles does not mean they are friends.",
       "People are riding bicycles.", "They are friends."},
      {"Just because a woman is using her cellphone does not mean she is playing "
       "a game.",
       "A woman is using her cellphone.", "She is playing a game."},
      {"Just because a man is confused doesn't mean he doesn't know where he is.",
       "A man is confused.", "He doesn't know where he is."}};
  for (const auto& c : cases) {
    auto r = ReconstructEsnli(Row2(), c.nle, Shipped(), ShippedLexicon());
    ASSERT_TRUE(r.instance.has_value()) << c.nle;
    EXPECT_EQ(*r.instance->Field("premise"), c.premise);
    EXPECT_EQ(*r.instance->Field("hypothesis"), c.hypothesis);
  }
}

TEST(ReconstructEsnliTest, NotReconstructable) {
  EXPECT_FALSE(ReconstructEsnli(Row2(), "Not all men are tall.", Shipped(),
                                ShippedLexicon())
                   .instance);
  auto r = ReconstructEsnli(Row2(), "Just because tall does not mean blue.",
                            Shipped(), ShippedLexicon());
  EXPECT_TRUE(r.match.has_value());
  EXPECT_FALSE(r.instance.has_value());
}

TEST(ReconstructComveTest, MonkeysAndSymmetry) {
  Instance inst = MakeComve("mt-re", "Giraffes have long necks.", "Monkeys have long necks.");
  ComveReconstruction r = ReconstructComve(
      inst, {"second sentence", "Monkeys have short necks.", std::nullopt});
  EXPECT_EQ(*r.instance.Field("sent1"), "Monkeys have short necks.");
  EXPECT_EQ(*r.instance.Field("sent2"), "Monkeys have long necks.");
  EXPECT_EQ(r.expected_label, "second sentence");

  ComveReconstruction s =
      ReconstructComve(inst, {"first sentence", "Giraffes are tall.", std::nullopt});
  EXPECT_EQ(*s.instance.Field("sent1"), "Giraffes have long necks.");
  EXPECT_EQ(*s.instance.Field("sent2"), "Giraffes are tall.");
  EXPECT_EQ(s.expected_label, "first sentence");

  ComveReconstruction same = ReconstructComve(
      inst, {"second sentence", "Giraffes have long necks.", std::nullopt});
  EXPECT_EQ(same.instance, [&] {
    Instance copy = inst;
    return copy;
  }());
  EXPECT_THROW(ReconstructComve(inst, {"second sentence", "", std::nullopt}), Error);
}

TEST(RunReconstructionTest, GoldenRowTwoIsUnfaithful) {
  auto ep = MakeMockEndpoint(MockModel::FromFile(TestData("golden_rules.jsonl")));
  Instance inst = Row2();
  ModelOutput orig = ep->Infer(inst);
  ASSERT_EQ(orig.label, "neutral");
  ReconstructionRecord r =
      RunReconstruction(inst, orig, *ep, Shipped(), ShippedLexicon());
  EXPECT_TRUE(r.reconstructable);
  EXPECT_EQ(r.template_id, "just-because-does-not");
  EXPECT_EQ(*r.reconstructed->Field("premise"), "People are talking.");
  EXPECT_EQ(*r.reconstructed->Field("hypothesis"), "They are having a chat.");
  EXPECT_EQ(r.expected_label, "neutral");
  EXPECT_EQ(r.reconstructed_label, "entailment");
  EXPECT_EQ(r.unfaithful, true);
}

TEST(RunReconstructionTest, NonReconstructableHasNoVerdict) {
  auto ep = MakeMockEndpoint(MockModel::FromFile(TestData("golden_rules.jsonl")));
  Instance inst = MakeNli("r1", "Man in a black suit.", "A tall person in a suit.");
  ReconstructionRecord r =
      RunReconstruction(inst, ep->Infer(inst), *ep, Shipped(), ShippedLexicon());
  EXPECT_FALSE(r.reconstructable);
  EXPECT_FALSE(r.unfaithful.has_value());
  EXPECT_FALSE(r.reconstructed_label.has_value());
}

TEST(RunReconstructionTest, QaIsNotSupported) {
  auto ep = MakeMockEndpoint(MockModel({AlwaysRule("{choice1}", "x")}));
  Instance qa = MakeQa("q", "Where?", "shelf", "table", "backpack");
  EXPECT_THROW(RunReconstruction(qa, ep->Infer(qa), *ep, Shipped(), ShippedLexicon()),
               Error);
}

TEST(RunReconstructionTest, ComveFixtureIsTotal) {
  auto ep = MakeMockEndpoint(
      MockModel::FromFile(TestData("comve_reconstruction_rules.jsonl")));
  LoadResult lr = LoadDataset(TestData("comve_reconstruction.csv"),
                              TaskKind::kCommonsenseChoice, SourceFormat::kCsv);
  for (const Instance& inst : lr.dataset.instances) {
    ReconstructionRecord r = RunReconstruction(inst, ep->Infer(inst), *ep, {},
                                               ShippedLexicon());
    EXPECT_TRUE(r.reconstructable) << inst.id;
    EXPECT_EQ(r.unfaithful, true) << inst.id;
  }
}

TEST(ReconstructionRecordTest, JsonRoundTrip) {
  std::string dir = ScratchDir("recon_records");
  auto ep = MakeMockEndpoint(MockModel::FromFile(TestData("golden_rules.jsonl")));
  Instance a = Row2();
  Instance b = MakeNli("b", "Man in a black suit.", "A tall person in a suit.");
  std::vector<ReconstructionRecord> recs = {
      RunReconstruction(a, ep->Infer(a), *ep, Shipped(), ShippedLexicon()),
      RunReconstruction(b, ep->Infer(b), *ep, Shipped(), ShippedLexicon())};
  for (const auto& r : recs) {
    Json j = ReconstructionRecordToJson(r);
    EXPECT_EQ(j["schema"], kReconstructionSchema);
    EXPECT_EQ(ReconstructionRecordFromJson(j), r);
  }
  std::ofstream(dir + "/r.jsonl") << SerializeRecords(recs);
  EXPECT_EQ(LoadReconstructionRecords(dir + "/r.jsonl"), recs);
  Json bad = ReconstructionRecordToJson(recs[1]);
  bad["unfaithful"] = true;
  EXPECT_THROW(ReconstructionRecordFromJson(bad), Error);
}

}  // namespace
}  // namespace nlefaith
