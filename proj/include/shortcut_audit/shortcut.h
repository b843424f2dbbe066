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

#ifndef SHORTCUT_AUDIT_SHORTCUT_H_
#define SHORTCUT_AUDIT_SHORTCUT_H_

#include <set>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/statusor.h"

namespace shortcut_audit {

enum class MatchMode {
  kAny,  // shortcut if any top token is in the head
  kAll,  // shortcut only if every top token is in the head
};

enum class CueType { kNone, kLexicon, kGrammar };

absl::StatusOr<MatchMode> ParseMatchMode(absl::string_view name);
absl::string_view MatchModeName(MatchMode mode);
absl::StatusOr<CueType> ParseCueType(absl::string_view name);
absl::string_view CueTypeName(CueType type);

// Decides whether a token is a grammatical (functional) cue. Checks run in
// the order punctuation, subword piece, stopword; tokens matching none of
// them are lexical.
class CueLexicon {
 public:
  // The bundled English function-word list.
  static CueLexicon Default();
  explicit CueLexicon(std::set<std::string> stopwords)
      : stopwords_(std::move(stopwords)) {}
  // One token per line. Blank lines and lines starting with '#' are skipped.
  static absl::StatusOr<CueLexicon> FromFile(const std::string& path);

  // Only non-alphanumeric ASCII characters.
  static bool IsPunctuation(absl::string_view token);
  // WordPiece "##" continuation or SentencePiece U+2581 prefix.
  static bool IsSubword(absl::string_view token);
  bool IsStopword(absl::string_view token) const;
  bool IsLexical(absl::string_view token) const;

  const std::set<std::string>& stopwords() const { return stopwords_; }

 private:
  std::set<std::string> stopwords_;
};

struct ShortcutVerdict {
  bool is_shortcut = false;
  std::set<std::string> matched_tokens;
  CueType cue_type = CueType::kNone;
  MatchMode match_mode = MatchMode::kAny;

  bool operator==(const ShortcutVerdict&) const = default;
};

// Lexicon when any token is lexical, grammar otherwise. Fails on an empty
// set.
absl::StatusOr<CueType> Categorize(const std::set<std::string>& matched_tokens,
                                   const CueLexicon& cues);

// Compares the top attributed tokens with the head of the predicted label.
// `matched_tokens` is always the intersection, whatever the mode.
absl::StatusOr<ShortcutVerdict> Detect(const std::vector<std::string>& top_tokens,
                                       const std::set<std::string>& head,
                                       MatchMode mode, const CueLexicon& cues);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_SHORTCUT_H_
