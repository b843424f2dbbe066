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

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace shortcut_audit {
namespace {

using json = nlohmann::json;
using u128 = unsigned __int128;

u128 Gcd(u128 a, u128 b) {
  while (b != 0) {
    const u128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

// p(y|w) / p(y) = count(w,y) * N / (count(w) * count(y)). The fraction is
// reduced first so equal ratios map to bit-identical doubles and a ratio of
// exactly one gives an LMI of exactly zero.
double ConditionalToMarginalRatio(int64_t count_wy, int64_t count_w,
                                  int64_t count_y, int64_t normalizer) {
  u128 num = static_cast<u128>(count_wy) * static_cast<u128>(normalizer);
  u128 den = static_cast<u128>(count_w) * static_cast<u128>(count_y);
  const u128 g = Gcd(num, den);
  num /= g;
  den /= g;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

absl::StatusOr<LmiNormalizer> ParseLmiNormalizer(absl::string_view name) {
  if (name == "total_tokens") return LmiNormalizer::kTotalTokens;
  if (name == "distinct_vocab") return LmiNormalizer::kDistinctVocab;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown LMI normalizer `", name, "`"));
}

absl::string_view LmiNormalizerName(LmiNormalizer normalizer) {
  return normalizer == LmiNormalizer::kTotalTokens ? "total_tokens"
                                                   : "distinct_vocab";
}

bool LmiRanksBefore(const LmiEntry& a, const LmiEntry& b) {
  if (a.lmi != b.lmi) return a.lmi > b.lmi;
  if (a.count_wy != b.count_wy) return a.count_wy > b.count_wy;
  return a.token < b.token;
}

size_t HeadSize(double head_fraction, size_t distinct_tokens) {
  if (distinct_tokens == 0) return 0;
  // The slack absorbs products such as 0.07 * 100 = 7.000000000000001.
  const double raw = head_fraction * static_cast<double>(distinct_tokens);
  const auto size = static_cast<size_t>(std::ceil(raw - 1e-9));
  return std::clamp<size_t>(size, 1, distinct_tokens);
}

absl::StatusOr<LmiTable> LmiTable::Compute(const Corpus& corpus,
                                           const LmiOptions& options) {
  if (!(options.head_fraction > 0.0 && options.head_fraction <= 1.0)) {
    return absl::InvalidArgumentError("head_fraction must lie in (0, 1]");
  }
  if (options.log_base < 0.0 || options.log_base == 1.0) {
    return absl::InvalidArgumentError("log base must be positive and not 1");
  }
  if (corpus.size() == 0) return absl::InvalidArgumentError("empty corpus");

  const int64_t normalizer =
      options.normalizer == LmiNormalizer::kTotalTokens
          ? corpus.total_tokens()
          : static_cast<int64_t>(corpus.vocab().size());
  const double log_scale =
      options.log_base == 0.0 ? 1.0 : 1.0 / std::log(options.log_base);

  LmiTable table;
  table.labels_ = corpus.labels();
  table.head_fraction_ = options.head_fraction;
  table.normalizer_ = options.normalizer;
  for (const auto& [label, counts] : corpus.token_label_counts()) {
    const int64_t count_y = corpus.label_token_totals().at(label);
    const double p_y = static_cast<double>(count_y) / normalizer;
    std::vector<LmiEntry>& entries = table.entries_[label];
    entries.reserve(counts.size());
    for (const auto& [token, count_wy] : counts) {
      const int64_t count_w = corpus.TokenCount(token);
      LmiEntry entry;
      entry.token = token;
      entry.count_wy = count_wy;
      entry.p_wy = static_cast<double>(count_wy) / normalizer;
      entry.p_y_given_w = static_cast<double>(count_wy) / count_w;
      entry.p_y = p_y;
      entry.lmi = entry.p_wy *
                  std::log(ConditionalToMarginalRatio(count_wy, count_w,
                                                      count_y, normalizer)) *
                  log_scale;
      entries.push_back(std::move(entry));
    }
    std::sort(entries.begin(), entries.end(), LmiRanksBefore);
  }
  table.BuildHeads();
  return table;
}

void LmiTable::BuildHeads() {
  heads_.clear();
  for (const std::string& label : labels_) {
    std::set<std::string>& head = heads_[label];
    auto it = entries_.find(label);
    if (it == entries_.end() || it->second.empty()) continue;
    const std::vector<LmiEntry>& entries = it->second;
    size_t cut = HeadSize(head_fraction_, entries.size());
    const LmiEntry& last = entries[cut - 1];
    while (cut < entries.size() && entries[cut].lmi == last.lmi &&
           entries[cut].count_wy == last.count_wy) {
      ++cut;
    }
    for (size_t i = 0; i < cut; ++i) head.insert(entries[i].token);
  }
}

absl::StatusOr<const std::vector<LmiEntry>*> LmiTable::Entries(
    const std::string& label) const {
  auto it = entries_.find(label);
  if (it == entries_.end()) {
    return absl::NotFoundError(absl::StrCat("unknown label `", label, "`"));
  }
  return &it->second;
}

absl::StatusOr<const std::set<std::string>*> LmiTable::Head(
    const std::string& label) const {
  auto it = heads_.find(label);
  if (it == heads_.end()) {
    return absl::NotFoundError(absl::StrCat("unknown label `", label, "`"));
  }
  return &it->second;
}

json LmiTable::ToJson() const {
  json labels = json::object();
  for (const auto& [label, entries] : entries_) {
    json rows = json::array();
    for (const LmiEntry& entry : entries) {
      rows.push_back({{"token", entry.token},
                      {"count", entry.count_wy},
                      {"lmi", entry.lmi},
                      {"p_wy", entry.p_wy},
                      {"p_y_given_w", entry.p_y_given_w},
                      {"p_y", entry.p_y}});
    }
    labels[label] = std::move(rows);
  }
  json heads = json::object();
  for (const auto& [label, head] : heads_) heads[label] = head;
  return {{"head_fraction", head_fraction_},
          {"normalizer", LmiNormalizerName(normalizer_)},
          {"labels", std::move(labels)},
          {"heads", std::move(heads)}};
}

absl::StatusOr<LmiTable> LmiTable::FromJson(const json& value) {
  try {
    LmiTable table;
    table.head_fraction_ = value.at("head_fraction").get<double>();
    if (!(table.head_fraction_ > 0.0 && table.head_fraction_ <= 1.0)) {
      return absl::InvalidArgumentError("head_fraction must lie in (0, 1]");
    }
    auto normalizer =
        ParseLmiNormalizer(value.at("normalizer").get<std::string>());
    if (!normalizer.ok()) return normalizer.status();
    table.normalizer_ = *normalizer;
    for (const auto& [label, rows] : value.at("labels").items()) {
      table.labels_.push_back(label);
      std::vector<LmiEntry>& entries = table.entries_[label];
      for (const json& row : rows) {
        LmiEntry entry;
        entry.token = row.at("token").get<std::string>();
        entry.count_wy = row.at("count").get<int64_t>();
        entry.lmi = row.at("lmi").get<double>();
        entry.p_wy = row.value("p_wy", 0.0);
        entry.p_y_given_w = row.value("p_y_given_w", 0.0);
        entry.p_y = row.value("p_y", 0.0);
        entries.push_back(std::move(entry));
      }
      std::sort(entries.begin(), entries.end(), LmiRanksBefore);
    }
    table.BuildHeads();
    return table;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed LMI table: ", e.what()));
  }
}

}  // namespace shortcut_audit
