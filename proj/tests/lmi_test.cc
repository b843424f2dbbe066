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

#include "shortcut_audit/lmi.h"

#include <cmath>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "shortcut_audit/random.h"

namespace shortcut_audit {
namespace {

using ::testing::UnorderedElementsAre;

Corpus FromTexts(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::vector<Sample> samples;
  for (const auto& [text, label] : rows) {
    samples.push_back({std::to_string(samples.size()), text, Tokenize(text), label});
  }
  return *Corpus::FromSamples(std::move(samples));
}

const LmiEntry* Find(const LmiTable& table, const std::string& label,
                     const std::string& token) {
  for (const LmiEntry& e : **table.Entries(label)) {
    if (e.token == token) return &e;
  }
  return nullptr;
}

// Random corpus over at most `max_vocab` distinct tokens.
Corpus RandomCorpus(Rng& rng, int max_vocab) {
  const int vocab = 2 + static_cast<int>(rng.UniformInt(max_vocab - 1));
  const int labels = 2 + static_cast<int>(rng.UniformInt(3));
  const int n = 3 + static_cast<int>(rng.UniformInt(30));
  std::vector<Sample> samples;
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.id = std::to_string(i);
    s.label = "y" + std::to_string(rng.UniformInt(labels));
    const int length = 1 + static_cast<int>(rng.UniformInt(8));
    for (int t = 0; t < length; ++t) {
      s.tokens.push_back("t" + std::to_string(rng.UniformInt(vocab)));
    }
    samples.push_back(std::move(s));
  }
  return *Corpus::FromSamples(std::move(samples));
}

TEST(LmiTest, HandComputedTwoSampleCorpus) {
  // N = 4 tokens: LMI(b, y1) = 1/4 * ln((1/1) / (2/4)); LMI(a, y1) = 0.
  const Corpus corpus = FromTexts({{"a b", "y1"}, {"a c", "y2"}});
  auto table = LmiTable::Compute(corpus);
  ASSERT_TRUE(table.ok());
  const LmiEntry* b = Find(*table, "y1", "b");
  ASSERT_NE(b, nullptr);
  EXPECT_NEAR(b->lmi, 0.25 * std::log(2.0), 1e-15);
  EXPECT_NEAR(b->lmi, 0.1733, 1e-4);
  EXPECT_DOUBLE_EQ(b->p_y_given_w, 1.0);
  EXPECT_DOUBLE_EQ(b->p_y, 0.5);
  const LmiEntry* a = Find(*table, "y1", "a");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->lmi, 0.0);
  EXPECT_EQ(Find(*table, "y1", "c"), nullptr);
}

TEST(LmiTest, ExclusiveTokenHasPositiveLmi) {
  const Corpus corpus = FromTexts({{"only here", "p"}, {"other words", "q"}});
  auto table = LmiTable::Compute(corpus);
  const LmiEntry* e = Find(*table, "p", "only");
  ASSERT_NE(e, nullptr);
  EXPECT_DOUBLE_EQ(e->p_y_given_w, 1.0);
  EXPECT_NEAR(e->lmi, e->p_wy * std::log(1.0 / e->p_y), 1e-15);
  EXPECT_GT(e->lmi, 0.0);
}

TEST(LmiTest, ConditionalEqualToMarginalGivesZero) {
  // "x" splits 1:1 across labels that each hold half the tokens.
  const Corpus corpus = FromTexts({{"x u", "p"}, {"x v", "q"}});
  auto table = LmiTable::Compute(corpus);
  EXPECT_EQ(Find(*table, "p", "x")->lmi, 0.0);
  EXPECT_EQ(Find(*table, "q", "x")->lmi, 0.0);
}

TEST(LmiTest, DistinctVocabNormalizer) {
  const Corpus corpus = FromTexts({{"a b", "y1"}, {"a c", "y2"}});
  LmiOptions options;
  options.normalizer = LmiNormalizer::kDistinctVocab;
  auto table = LmiTable::Compute(corpus, options);
  ASSERT_TRUE(table.ok());
  // |V| = 3: p(b,y1) = 1/3, p(y1) = 2/3.
  const LmiEntry* b = Find(*table, "y1", "b");
  EXPECT_NEAR(b->lmi, (1.0 / 3) * std::log(1.0 / (2.0 / 3)), 1e-15);
  const auto oracle = oracle::BruteForceLmi(corpus.samples(), true);
  for (const std::string& label : corpus.labels()) {
    for (const LmiEntry& e : **table->Entries(label)) {
      EXPECT_NEAR(e.lmi, oracle.at({e.token, label}).lmi, 1e-12);
    }
  }
}

TEST(LmiTest, EntriesSortedDescending) {
  Rng rng(5);
  const Corpus corpus = RandomCorpus(rng, 30);
  auto table = LmiTable::Compute(corpus);
  for (const std::string& label : table->labels()) {
    const auto& entries = **table->Entries(label);
    for (size_t i = 1; i < entries.size(); ++i) {
      EXPECT_FALSE(LmiRanksBefore(entries[i], entries[i - 1]));
    }
  }
}

TEST(LmiTest, HeadSizes) {
  EXPECT_EQ(HeadSize(0.05, 100), 5u);
  EXPECT_EQ(HeadSize(0.05, 1), 1u);
  EXPECT_EQ(HeadSize(0.05, 21), 2u);
  EXPECT_EQ(HeadSize(0.07, 100), 7u);
  EXPECT_EQ(HeadSize(1.0, 13), 13u);
}

TEST(LmiTest, HeadOfHundredDistinctTokens) {
  // Token i appears i+1 times with label "p" and once with "q": strictly
  // distinct LMI values, so no boundary ties.
  std::vector<Sample> samples;
  for (int i = 0; i < 100; ++i) {
    const std::string token = "w" + std::to_string(i);
    Sample s{std::to_string(samples.size()), "", {}, "p"};
    for (int r = 0; r <= i; ++r) s.tokens.push_back(token);
    samples.push_back(s);
    samples.push_back({std::to_string(samples.size()), "", {token}, "q"});
  }
  const Corpus corpus = *Corpus::FromSamples(std::move(samples));
  auto table = LmiTable::Compute(corpus);
  auto head = table->Head("p");
  ASSERT_TRUE(head.ok());
  EXPECT_THAT(**head, UnorderedElementsAre("w99", "w98", "w97", "w96", "w95"));
}

TEST(LmiTest, SingleTokenLabelHasHeadOfOne) {
  const Corpus corpus = FromTexts({{"solo", "p"}, {"a b c", "q"}});
  auto table = LmiTable::Compute(corpus);
  EXPECT_THAT(**table->Head("p"), UnorderedElementsAre("solo"));
}

TEST(LmiTest, BoundaryTiesIncluded) {
  // Four tokens exclusive to "p" with equal counts tie exactly; a 5% head of
  // four rounds up to one, then pulls in the tied rest.
  const Corpus corpus = FromTexts({{"a b c d", "p"}, {"e f", "q"}});
  auto table = LmiTable::Compute(corpus);
  EXPECT_THAT(**table->Head("p"), UnorderedElementsAre("a", "b", "c", "d"));
}

TEST(LmiTest, UnknownLabel) {
  const Corpus corpus = FromTexts({{"a", "p"}, {"b", "q"}});
  auto table = LmiTable::Compute(corpus);
  EXPECT_EQ(table->Head("zzz").status().code(), absl::StatusCode::kNotFound);
  EXPECT_FALSE(table->Entries("zzz").ok());
}

TEST(LmiTest, RejectsBadOptions) {
  const Corpus corpus = FromTexts({{"a", "p"}, {"b", "q"}});
  EXPECT_FALSE(LmiTable::Compute(corpus, {.head_fraction = 0.0}).ok());
  EXPECT_FALSE(LmiTable::Compute(corpus, {.head_fraction = 1.5}).ok());
  EXPECT_FALSE(LmiTable::Compute(corpus, {.log_base = 1.0}).ok());
}

TEST(LmiTest, RandomHeadsMatchSortAndSliceOracle) {
  Rng rng(50);
  for (int trial = 0; trial < 30; ++trial) {
    const Corpus corpus = RandomCorpus(rng, 50);
    const double fraction = 0.05 + 0.3 * rng.UniformDouble();
    auto table = LmiTable::Compute(corpus, {.head_fraction = fraction});
    ASSERT_TRUE(table.ok());
    const auto values = oracle::BruteForceLmi(corpus.samples());
    for (const std::string& label : corpus.labels()) {
      std::vector<std::pair<std::string, oracle::LmiValue>> scored;
      for (const auto& [key, v] : values) {
        if (key.second == label) scored.emplace_back(key.first, v);
      }
      EXPECT_EQ(**table->Head(label), oracle::SortAndSliceHead(scored, fraction))
          << "trial " << trial << " label " << label;
    }
  }
}

TEST(LmiTest, MonotoneInJointCount) {
  // Adding "k" occurrences to label p while holding count(k) and N fixed:
  // move one "k" from q to p and one filler from p to q.
  auto lmi_with = [](int k_in_p) {
    std::vector<std::pair<std::string, std::string>> rows;
    std::string p_text, q_text;
    for (int i = 0; i < 10; ++i) {
      p_text += (i < k_in_p ? "k " : "f ");
      q_text += (i < 10 - k_in_p ? "k " : "g ");
    }
    rows.push_back({p_text, "p"});
    rows.push_back({q_text, "q"});
    const Corpus corpus = FromTexts(rows);
    auto table = LmiTable::Compute(corpus);
    return Find(*table, "p", "k")->lmi;
  };
  // p(y|w) > p(y) = 1/2 once k_in_p > 5.
  for (int k = 6; k < 9; ++k) EXPECT_LT(lmi_with(k), lmi_with(k + 1));
}

TEST(LmiTest, JsonRoundTrip) {
  Rng rng(8);
  const Corpus corpus = RandomCorpus(rng, 20);
  auto table = LmiTable::Compute(corpus, {.head_fraction = 0.2});
  const nlohmann::json json = table->ToJson();
  auto again = LmiTable::FromJson(json);
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_EQ(again->ToJson(), json);
  for (const std::string& label : table->labels()) {
    EXPECT_EQ(**again->Head(label), **table->Head(label));
  }
  EXPECT_FALSE(LmiTable::FromJson(nlohmann::json::object()).ok());
}

}  // namespace
}  // namespace shortcut_audit
