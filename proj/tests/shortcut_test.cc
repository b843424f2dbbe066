// Copyright 2026 The Shortcut Audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shortcut_audit/shortcut.h"

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "shortcut_audit/random.h"
#include "test_util.h"

namespace shortcut_audit {
namespace {

using ::testing::ElementsAre;

const CueLexicon& Cues() {
  static const CueLexicon* cues = new CueLexicon(CueLexicon::Default());
  return *cues;
}

TEST(ShortcutTest, DisjointSetsAreNotShortcut) {
  auto v = Detect({"a", "b", "c"}, {"x", "y", "z"}, MatchMode::kAny, Cues());
  ASSERT_TRUE(v.ok());
  EXPECT_FALSE(v->is_shortcut);
  EXPECT_EQ(v->cue_type, CueType::kNone);
  EXPECT_TRUE(v->matched_tokens.empty());
}

TEST(ShortcutTest, LexicalMatchInAnyMode) {
  auto v = Detect({"awesome", "!", "this"}, {"awesome", "great"}, MatchMode::kAny,
                  Cues());
  EXPECT_TRUE(v->is_shortcut);
  EXPECT_THAT(v->matched_tokens, ElementsAre("awesome"));
  EXPECT_EQ(v->cue_type, CueType::kLexicon);
}

TEST(ShortcutTest, AllModeNeedsEveryToken) {
  const std::set<std::string> head = {"awesome", "!", "great"};
  auto partial = Detect({"awesome", "!", "this"}, head, MatchMode::kAll, Cues());
  EXPECT_FALSE(partial->is_shortcut);
  EXPECT_EQ(partial->cue_type, CueType::kNone);
  EXPECT_THAT(partial->matched_tokens, ElementsAre("!", "awesome"));
  auto full = Detect({"awesome", "!"}, head, MatchMode::kAll, Cues());
  EXPECT_TRUE(full->is_shortcut);
  EXPECT_EQ(full->match_mode, MatchMode::kAll);
}

TEST(ShortcutTest, EmptyTopTokensIsError) {
  EXPECT_FALSE(Detect({}, {"a"}, MatchMode::kAny, Cues()).ok());
  EXPECT_FALSE(Categorize({}, Cues()).ok());
}

TEST(ShortcutTest, TaxonomyExamples) {
  EXPECT_EQ(*Categorize({"michael", "phelps", "won"}, Cues()), CueType::kLexicon);
  EXPECT_EQ(*Categorize({"?"}, Cues()), CueType::kGrammar);
  EXPECT_EQ(*Categorize({"!", "awesome"}, Cues()), CueType::kLexicon);
  EXPECT_EQ(*Categorize({"...", "the", "of"}, Cues()), CueType::kGrammar);
  EXPECT_EQ(*Categorize({"##ing"}, Cues()), CueType::kGrammar);
  EXPECT_EQ(*Categorize({"▁the"}, Cues()), CueType::kGrammar);
}

TEST(ShortcutTest, TokenClasses) {
  EXPECT_TRUE(CueLexicon::IsPunctuation("?"));
  EXPECT_TRUE(CueLexicon::IsPunctuation("..."));
  EXPECT_FALSE(CueLexicon::IsPunctuation("a!"));
  EXPECT_FALSE(CueLexicon::IsPunctuation("42"));
  EXPECT_FALSE(CueLexicon::IsPunctuation(""));
  EXPECT_TRUE(CueLexicon::IsSubword("##s"));
  EXPECT_FALSE(CueLexicon::IsSubword("#s"));
  EXPECT_TRUE(Cues().IsStopword("the"));
  EXPECT_TRUE(Cues().IsStopword("won"));
  EXPECT_FALSE(Cues().IsStopword("awesome"));
  EXPECT_TRUE(Cues().IsLexical("awesome"));
  EXPECT_FALSE(Cues().IsLexical("!"));
  EXPECT_EQ(Cues().stopwords().size(), 179u);
}

TEST(ShortcutTest, ShippedStopwordFileMatchesDefault) {
  auto loaded = CueLexicon::FromFile((testing_util::DataDir() / "stopwords.txt").string());
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(loaded->stopwords(), Cues().stopwords());
  EXPECT_FALSE(CueLexicon::FromFile("/nonexistent/stopwords.txt").ok());
}

TEST(ShortcutTest, CustomLexicon) {
  const CueLexicon cues({"awesome"});
  EXPECT_EQ(*Categorize({"awesome"}, cues), CueType::kGrammar);
  EXPECT_EQ(*Categorize({"the"}, cues), CueType::kLexicon);
}

TEST(ShortcutTest, NamesRoundTrip) {
  for (MatchMode m : {MatchMode::kAny, MatchMode::kAll}) {
    EXPECT_EQ(*ParseMatchMode(MatchModeName(m)), m);
  }
  for (CueType c : {CueType::kNone, CueType::kLexicon, CueType::kGrammar}) {
    EXPECT_EQ(*ParseCueType(CueTypeName(c)), c);
  }
  EXPECT_FALSE(ParseMatchMode("most").ok());
}

TEST(ShortcutTest, RandomizedVerdictProperties) {
  // Any-mode flags iff the intersection is non-empty; all-mode flags imply
  // any-mode flags; enlarging the head never unflags.
  Rng rng(9);
  const std::vector<std::string> pool = {"a", "b", "the", "!", "?", "##x", "c", "of"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> top;
    const int k = 1 + static_cast<int>(rng.UniformInt(3));
    for (int i = 0; i < k; ++i) top.push_back(pool[rng.UniformInt(pool.size())]);
    std::set<std::string> head;
    for (const auto& t : pool) {
      if (rng.Bernoulli(0.3)) head.insert(t);
    }
    const auto any = *Detect(top, head, MatchMode::kAny, Cues());
    const auto all = *Detect(top, head, MatchMode::kAll, Cues());
    EXPECT_EQ(any.is_shortcut, !any.matched_tokens.empty());
    EXPECT_EQ(any.matched_tokens, all.matched_tokens);
    if (all.is_shortcut) EXPECT_TRUE(any.is_shortcut);
    EXPECT_EQ(any.is_shortcut, any.cue_type != CueType::kNone);
    std::set<std::string> bigger = head;
    bigger.insert(pool[rng.UniformInt(pool.size())]);
    if (any.is_shortcut) {
      EXPECT_TRUE(Detect(top, bigger, MatchMode::kAny, Cues())->is_shortcut);
    }
    if (all.is_shortcut) {
      EXPECT_TRUE(Detect(top, bigger, MatchMode::kAll, Cues())->is_shortcut);
    }
  }
}

}  // namespace
}  // namespace shortcut_audit
