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

#ifndef SHORTCUT_AUDIT_CORPUS_H_
#define SHORTCUT_AUDIT_CORPUS_H_

#include <cstdint>
#include <map>
#include <string>
#include "absl/strings/string_view.h"
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace shortcut_audit {

struct TokenizerOptions {
  bool lowercase = true;
};

// Word-level tokenizer. Splits on whitespace, emits every ASCII punctuation
// character as its own token except "...", which stays whole. Bytes outside
// ASCII are treated as word characters so UTF-8 words survive intact.
std::vector<std::string> Tokenize(absl::string_view text,
                                  const TokenizerOptions& options = {});

struct Sample {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;
  std::string label;
};

// Labeled samples plus the token/label occurrence counts derived from them.
// Immutable once built.
class Corpus {
 public:
  using CountMap = std::map<std::string, int64_t>;

  // Fails on duplicate ids, empty token lists, or no samples at all.
  static absl::StatusOr<Corpus> FromSamples(std::vector<Sample> samples);

  const std::vector<Sample>& samples() const { return samples_; }
  size_t size() const { return samples_.size(); }
  // Sorted lexicographically.
  const std::vector<std::string>& labels() const { return labels_; }
  // token -> total occurrences.
  const CountMap& vocab() const { return vocab_; }
  // label -> (token -> occurrences within samples of that label).
  const std::map<std::string, CountMap>& token_label_counts() const {
    return token_label_counts_;
  }
  // label -> total token occurrences in samples of that label.
  const CountMap& label_token_totals() const { return label_token_totals_; }
  int64_t total_tokens() const { return total_tokens_; }

  int64_t TokenCount(const std::string& token) const;
  int64_t TokenLabelCount(const std::string& token,
                          const std::string& label) const;
  bool HasLabel(const std::string& label) const;

 private:
  Corpus() = default;

  std::vector<Sample> samples_;
  std::vector<std::string> labels_;
  CountMap vocab_;
  std::map<std::string, CountMap> token_label_counts_;
  CountMap label_token_totals_;
  int64_t total_tokens_ = 0;
};

enum class CorpusFormat { kJsonl, kCsv };

absl::StatusOr<CorpusFormat> ParseCorpusFormat(absl::string_view name);
// Picks the format from the file extension; anything but ".csv" is JSONL.
CorpusFormat GuessCorpusFormat(absl::string_view path);

struct LoadSummary {
  int64_t records = 0;
  int64_t dropped_empty = 0;
};

// Reads a labeled dataset. Samples whose text tokenizes to nothing are
// dropped and counted in `summary`, which is filled even when loading fails.
absl::StatusOr<Corpus> LoadCorpus(const std::string& path, CorpusFormat format,
                                  const TokenizerOptions& options = {},
                                  LoadSummary* summary = nullptr);

// Same as LoadCorpus but parses from an in-memory buffer.
absl::StatusOr<Corpus> ParseCorpus(absl::string_view content,
                                   CorpusFormat format,
                                   const TokenizerOptions& options = {},
                                   LoadSummary* summary = nullptr);

struct SplitFractions {
  double train = 0.8;
  double test = 0.2;
};

// Seeded random partition. The train side receives round(train * n) samples.
absl::StatusOr<std::pair<Corpus, Corpus>> Split(const Corpus& corpus,
                                                SplitFractions fractions,
                                                uint64_t seed);

// One JSON object per line with `id`, `text` and `label`.
std::string CorpusToJsonl(const Corpus& corpus);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_CORPUS_H_
