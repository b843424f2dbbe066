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

#ifndef SHORTCUT_AUDIT_LMI_H_
#define SHORTCUT_AUDIT_LMI_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "shortcut_audit/corpus.h"

namespace shortcut_audit {

// Denominator used for p(w, y) and p(y).
enum class LmiNormalizer {
  // Total token occurrences in the corpus; yields proper probabilities.
  kTotalTokens,
  // Number of distinct tokens |V|; p(y) may exceed 1 under this choice.
  kDistinctVocab,
};

absl::StatusOr<LmiNormalizer> ParseLmiNormalizer(absl::string_view name);
absl::string_view LmiNormalizerName(LmiNormalizer normalizer);

struct LmiOptions {
  double head_fraction = 0.05;
  LmiNormalizer normalizer = LmiNormalizer::kTotalTokens;
  // Natural log by default. Head membership does not depend on the base.
  double log_base = 0.0;
};

struct LmiEntry {
  std::string token;
  int64_t count_wy = 0;
  double p_wy = 0.0;
  double p_y_given_w = 0.0;
  double p_y = 0.0;
  double lmi = 0.0;
};

// Ranking used inside a label: higher lmi, then higher count_wy, then token.
bool LmiRanksBefore(const LmiEntry& a, const LmiEntry& b);

// Local mutual information between each token and each label, with the
// per-label head (top `head_fraction` of tokens by LMI).
class LmiTable {
 public:
  static absl::StatusOr<LmiTable> Compute(const Corpus& corpus,
                                          const LmiOptions& options = {});

  const std::vector<std::string>& labels() const { return labels_; }
  double head_fraction() const { return head_fraction_; }
  LmiNormalizer normalizer() const { return normalizer_; }

  // Entries with count_wy > 0, sorted by LmiRanksBefore.
  absl::StatusOr<const std::vector<LmiEntry>*> Entries(
      const std::string& label) const;

  // ceil(head_fraction * K) top tokens out of the K tokens seen with the
  // label. Entries tied with the last one on both lmi and count_wy are also
  // included.
  absl::StatusOr<const std::set<std::string>*> Head(
      const std::string& label) const;

  // {"head_fraction", "normalizer", "labels": {label: [{token,count,lmi}]}}
  nlohmann::json ToJson() const;
  static absl::StatusOr<LmiTable> FromJson(const nlohmann::json& value);

 private:
  LmiTable() = default;
  void BuildHeads();

  std::vector<std::string> labels_;
  std::map<std::string, std::vector<LmiEntry>> entries_;
  std::map<std::string, std::set<std::string>> heads_;
  double head_fraction_ = 0.05;
  LmiNormalizer normalizer_ = LmiNormalizer::kTotalTokens;
};

// Number of head tokens before boundary ties are added.
size_t HeadSize(double head_fraction, size_t distinct_tokens);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_LMI_H_
