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

#include "shortcut_audit/corpus.h"

#include <set>

#include "absl/strings/str_join.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "shortcut_audit/random.h"
#include "test_util.h"

namespace shortcut_audit {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;
using ::testing::IsEmpty;

TEST(TokenizeTest, SplitsPunctuation) {
  EXPECT_THAT(Tokenize("This is awesome!"), ElementsAre("this", "is", "awesome", "!"));
}

TEST(TokenizeTest, KeepsEllipsisWhole) {
  EXPECT_THAT(Tokenize("This is tragic..."),
              ElementsAre("this", "is", "tragic", "..."));
  EXPECT_THAT(Tokenize("a....b"), ElementsAre("a", "...", ".", "b"));
}

TEST(TokenizeTest, EmptyAndWhitespace) {
  EXPECT_THAT(Tokenize(""), IsEmpty());
  EXPECT_THAT(Tokenize(" \t\n "), IsEmpty());
}

TEST(TokenizeTest, LowercasingIsConfigurable) {
  EXPECT_THAT(Tokenize("What ARE", {.lowercase = false}), ElementsAre("What", "ARE"));
  EXPECT_THAT(Tokenize("What ARE"), ElementsAre("what", "are"));
}

TEST(TokenizeTest, ContractionsAndUtf8) {
  EXPECT_THAT(Tokenize("didn't"), ElementsAre("didn", "'", "t"));
  EXPECT_THAT(Tokenize("caf\xC3\xA9 ok"), ElementsAre("caf\xC3\xA9", "ok"));
}

// tokenize(join(tokens)) == tokens for random byte soup.
TEST(TokenizeTest, IdempotentOnJoinedOutput) {
  const std::string alphabet = "abcXYZ019 .,!?'\"-...\t#";
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int length = static_cast<int>(rng.UniformInt(40));
    for (int i = 0; i < length; ++i) text.push_back(alphabet[rng.UniformInt(alphabet.size())]);
    const std::vector<std::string> tokens = Tokenize(text);
    EXPECT_EQ(Tokenize(absl::StrJoin(tokens, " ")), tokens) << text;
  }
}

TEST(LoadCorpusTest, JsonlTwoRecords) {
  auto corpus = ParseCorpus(
      "{\"text\":\"This is awesome!\",\"label\":\"positive\"}\n"
      "{\"text\":\"This is tragic...\",\"label\":\"negative\"}\n",
      CorpusFormat::kJsonl);
  ASSERT_TRUE(corpus.ok()) << corpus.status();
  EXPECT_EQ(corpus->size(), 2u);
  EXPECT_THAT(corpus->labels(), ElementsAre("negative", "positive"));
  EXPECT_EQ(corpus->samples()[0].id, "0");
  EXPECT_EQ(corpus->samples()[1].id, "1");
  EXPECT_EQ(corpus->TokenCount("this"), 2);
  EXPECT_EQ(corpus->TokenLabelCount("!", "positive"), 1);
  EXPECT_EQ(corpus->TokenLabelCount("!", "negative"), 0);
  EXPECT_EQ(corpus->total_tokens(), 8);
}

TEST(LoadCorpusTest, EmptyFileIsAnError) {
  auto corpus = ParseCorpus("", CorpusFormat::kJsonl);
  ASSERT_FALSE(corpus.ok());
  EXPECT_THAT(corpus.status().message(), HasSubstr("empty corpus"));
}

TEST(LoadCorpusTest, WhitespaceOnlyRecordIsDroppedAndCounted) {
  LoadSummary summary;
  auto corpus = ParseCorpus("{\"text\":\"   \",\"label\":\"a\"}\n",
                            CorpusFormat::kJsonl, {}, &summary);
  ASSERT_FALSE(corpus.ok());
  EXPECT_THAT(corpus.status().message(), HasSubstr("empty corpus"));
  EXPECT_EQ(summary.records, 1);
  EXPECT_EQ(summary.dropped_empty, 1);
}

TEST(LoadCorpusTest, DropsEmptySamplesButKeepsOthers) {
  LoadSummary summary;
  auto corpus = ParseCorpus(
      "{\"text\":\"...\",\"label\":\"a\"}\n{\"text\":\"\",\"label\":\"a\"}\n"
      "{\"text\":\"ok\",\"label\":\"b\"}\n",
      CorpusFormat::kJsonl, {}, &summary);
  ASSERT_TRUE(corpus.ok());
  EXPECT_EQ(corpus->size(), 2u);
  EXPECT_EQ(summary.dropped_empty, 1);
  EXPECT_EQ(corpus->samples()[1].id, "2");
}

TEST(LoadCorpusTest, MalformedRecordReportsLine) {
  auto corpus = ParseCorpus(
      "{\"text\":\"fine\",\"label\":\"a\"}\n{\"text\":\"oops\"}\n",
      CorpusFormat::kJsonl);
  ASSERT_FALSE(corpus.ok());
  EXPECT_THAT(corpus.status().message(), HasSubstr("line 2"));
  EXPECT_THAT(corpus.status().message(), HasSubstr("label"));

  auto broken = ParseCorpus("{\"text\":\"x\",\n", CorpusFormat::kJsonl);
  ASSERT_FALSE(broken.ok());
  EXPECT_THAT(broken.status().message(), HasSubstr("line 1"));

  auto null_text = ParseCorpus("{\"text\":null,\"label\":\"a\"}\n", CorpusFormat::kJsonl);
  EXPECT_FALSE(null_text.ok());
}

TEST(LoadCorpusTest, DuplicateIdsRejected) {
  auto corpus = ParseCorpus(
      "{\"id\":\"x\",\"text\":\"a\",\"label\":\"p\"}\n"
      "{\"id\":\"x\",\"text\":\"b\",\"label\":\"q\"}\n",
      CorpusFormat::kJsonl);
  ASSERT_FALSE(corpus.ok());
  EXPECT_THAT(corpus.status().message(), HasSubstr("duplicate"));
}

TEST(LoadCorpusTest, CsvWithQuoting) {
  auto corpus = ParseCorpus(
      "label,text\n"
      "positive,\"Great, really \"\"great\"\"!\"\n"
      "negative,\"spans\ntwo lines\"\n"
      "negative,plain\n",
      CorpusFormat::kCsv);
  ASSERT_TRUE(corpus.ok()) << corpus.status();
  ASSERT_EQ(corpus->size(), 3u);
  EXPECT_EQ(corpus->samples()[0].text, "Great, really \"great\"!");
  EXPECT_THAT(corpus->samples()[1].tokens, ElementsAre("spans", "two", "lines"));
  EXPECT_EQ(corpus->samples()[2].id, "2");
}

TEST(LoadCorpusTest, CsvErrors) {
  EXPECT_FALSE(ParseCorpus("text,other\nx,y\n", CorpusFormat::kCsv).ok());
  auto ragged = ParseCorpus("text,label\na,b\nc\n", CorpusFormat::kCsv);
  ASSERT_FALSE(ragged.ok());
  EXPECT_THAT(ragged.status().message(), HasSubstr("line 3"));
  EXPECT_FALSE(ParseCorpus("text,label\n\"open,b\n", CorpusFormat::kCsv).ok());
}

TEST(LoadCorpusTest, MissingFile) {
  auto corpus = LoadCorpus("/nonexistent/corpus.jsonl", CorpusFormat::kJsonl);
  ASSERT_FALSE(corpus.ok());
  EXPECT_EQ(corpus.status().code(), absl::StatusCode::kNotFound);
}

TEST(LoadCorpusTest, ShippedExampleLoads) {
  auto corpus = LoadCorpus((testing_util::DataDir() / "fixtures/sentiment_tiny.jsonl").string(),
                           CorpusFormat::kJsonl);
  ASSERT_TRUE(corpus.ok()) << corpus.status();
  EXPECT_GE(corpus->size(), 2u);
}

Corpus MakeCorpus(int n) {
  std::vector<Sample> samples;
  for (int i = 0; i < n; ++i) {
    const std::string text = "tok" + std::to_string(i % 4) + " common";
    samples.push_back({std::to_string(i), text, Tokenize(text), i % 2 ? "odd" : "even"});
  }
  return *Corpus::FromSamples(std::move(samples));
}

TEST(CorpusTest, CountsAreConsistent) {
  const Corpus corpus = MakeCorpus(25);
  int64_t total = 0;
  for (const auto& [token, count] : corpus.vocab()) {
    int64_t by_label = 0;
    for (const std::string& label : corpus.labels()) {
      by_label += corpus.TokenLabelCount(token, label);
    }
    EXPECT_EQ(by_label, count) << token;
    total += count;
  }
  EXPECT_EQ(total, corpus.total_tokens());

  // Rebuilding from the samples reproduces every count.
  auto rebuilt = Corpus::FromSamples(corpus.samples());
  ASSERT_TRUE(rebuilt.ok());
  EXPECT_EQ(rebuilt->vocab(), corpus.vocab());
  EXPECT_EQ(rebuilt->token_label_counts(), corpus.token_label_counts());
  EXPECT_EQ(rebuilt->total_tokens(), corpus.total_tokens());
}

TEST(SplitTest, PartitionSizesAndDisjointIds) {
  const Corpus corpus = MakeCorpus(10);
  auto split = Split(corpus, {0.8, 0.2}, 7);
  ASSERT_TRUE(split.ok()) << split.status();
  const auto& [train, test] = *split;
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(test.size(), 2u);
  std::set<std::string> ids;
  for (const Sample& s : train.samples()) ids.insert(s.id);
  for (const Sample& s : test.samples()) ids.insert(s.id);
  EXPECT_EQ(ids.size(), 10u);
  for (const std::string& label : test.labels()) EXPECT_TRUE(corpus.HasLabel(label));
}

TEST(SplitTest, DegenerateFractions) {
  const Corpus corpus = MakeCorpus(10);
  auto split = Split(corpus, {1.0, 0.0}, 7);
  ASSERT_FALSE(split.ok());
  EXPECT_THAT(split.status().message(), HasSubstr("empty split"));
  EXPECT_FALSE(Split(corpus, {0.5, 0.4}, 7).ok());
  EXPECT_FALSE(Split(MakeCorpus(1), {0.5, 0.5}, 7).ok());
}

TEST(SplitTest, Deterministic) {
  const Corpus corpus = MakeCorpus(50);
  auto a = Split(corpus, {0.7, 0.3}, 3);
  auto b = Split(corpus, {0.7, 0.3}, 3);
  ASSERT_TRUE(a.ok() && b.ok());
  ASSERT_EQ(a->first.size(), b->first.size());
  for (size_t i = 0; i < a->first.size(); ++i) {
    EXPECT_EQ(a->first.samples()[i].id, b->first.samples()[i].id);
  }
  auto c = Split(corpus, {0.7, 0.3}, 4);
  ASSERT_TRUE(c.ok());
  bool differs = false;
  for (size_t i = 0; i < a->first.size(); ++i) {
    differs |= a->first.samples()[i].id != c->first.samples()[i].id;
  }
  EXPECT_TRUE(differs);
}

TEST(CorpusTest, JsonlRoundTrip) {
  const Corpus corpus = MakeCorpus(6);
  auto again = ParseCorpus(CorpusToJsonl(corpus), CorpusFormat::kJsonl);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(CorpusToJsonl(*again), CorpusToJsonl(corpus));
}

}  // namespace
}  // namespace shortcut_audit
