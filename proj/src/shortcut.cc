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

#include <algorithm>
#include <cctype>
#include <fstream>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"

namespace shortcut_audit {
namespace {

// Same list as data/stopwords.txt.
constexpr const char* kDefaultStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you",
    "you're", "you've", "you'll", "you'd", "your", "yours", "yourself",
    "yourselves", "he", "him", "his", "himself", "she", "she's", "her",
    "hers", "herself", "it", "it's", "its", "itself", "they", "them", "their",
    "theirs", "themselves", "what", "which", "who", "whom", "this", "that",
    "that'll", "these", "those", "am", "is", "are", "was", "were", "be",
    "been", "being", "have", "has", "had", "having", "do", "does", "did",
    "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as",
    "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above",
    "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
    "under", "again", "further", "then", "once", "here", "there", "when",
    "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own",
    "same", "so", "than", "too", "very", "s", "t", "can", "will", "just",
    "don", "don't", "should", "should've", "now", "d", "ll", "m", "o", "re",
    "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven",
    "haven't", "isn", "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't",
    "needn", "needn't", "shan", "shan't", "shouldn", "shouldn't", "wasn",
    "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't",
};

constexpr absl::string_view kSentencePieceMarker = "\xE2\x96\x81";  // U+2581

std::string AsciiLower(absl::string_view token) {
  std::string lower(token);
  absl::AsciiStrToLower(&lower);
  return lower;
}

}  // namespace

absl::StatusOr<MatchMode> ParseMatchMode(absl::string_view name) {
  if (name == "any") return MatchMode::kAny;
  if (name == "all") return MatchMode::kAll;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown match mode `", name, "`"));
}

absl::string_view MatchModeName(MatchMode mode) {
  return mode == MatchMode::kAny ? "any" : "all";
}

absl::StatusOr<CueType> ParseCueType(absl::string_view name) {
  if (name == "none") return CueType::kNone;
  if (name == "lexicon") return CueType::kLexicon;
  if (name == "grammar") return CueType::kGrammar;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown cue type `", name, "`"));
}

absl::string_view CueTypeName(CueType type) {
  switch (type) {
    case CueType::kNone:
      return "none";
    case CueType::kLexicon:
      return "lexicon";
    case CueType::kGrammar:
      return "grammar";
  }
  return "none";
}

CueLexicon CueLexicon::Default() {
  return CueLexicon(std::set<std::string>(std::begin(kDefaultStopwords),
                                          std::end(kDefaultStopwords)));
}

absl::StatusOr<CueLexicon> CueLexicon::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::set<std::string> stopwords;
  std::string line;
  while (std::getline(in, line)) {
    absl::string_view word = absl::StripAsciiWhitespace(line);
    if (word.empty() || word.front() == '#') continue;
    stopwords.insert(AsciiLower(word));
  }
  return CueLexicon(std::move(stopwords));
}

bool CueLexicon::IsPunctuation(absl::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && !std::isalnum(u);
  });
}

bool CueLexicon::IsSubword(absl::string_view token) {
  return (token.size() > 2 && absl::StartsWith(token, "##")) ||
         (token.size() > kSentencePieceMarker.size() &&
          absl::StartsWith(token, kSentencePieceMarker));
}

bool CueLexicon::IsStopword(absl::string_view token) const {
  return stopwords_.contains(AsciiLower(token));
}

bool CueLexicon::IsLexical(absl::string_view token) const {
  return !IsPunctuation(token) && !IsSubword(token) && !IsStopword(token);
}

absl::StatusOr<CueType> Categorize(const std::set<std::string>& matched_tokens,
                                   const CueLexicon& cues) {
  if (matched_tokens.empty()) {
    return absl::InvalidArgumentError("cannot categorize an empty match");
  }
  for (const std::string& token : matched_tokens) {
    if (cues.IsLexical(token)) return CueType::kLexicon;
  }
  return CueType::kGrammar;
}

absl::StatusOr<ShortcutVerdict> Detect(const std::vector<std::string>& top_tokens,
                                       const std::set<std::string>& head,
                                       MatchMode mode, const CueLexicon& cues) {
  if (top_tokens.empty()) {
    return absl::InvalidArgumentError("no attributed tokens to compare");
  }
  ShortcutVerdict verdict;
  verdict.match_mode = mode;
  bool all_in_head = true;
  for (const std::string& token : top_tokens) {
    if (head.contains(token)) {
      verdict.matched_tokens.insert(token);
    } else {
      all_in_head = false;
    }
  }
  verdict.is_shortcut = mode == MatchMode::kAny
                            ? !verdict.matched_tokens.empty()
                            : all_in_head;
  if (verdict.is_shortcut) {
    auto cue = Categorize(verdict.matched_tokens, cues);
    if (!cue.ok()) return cue.status();
    verdict.cue_type = *cue;
  }
  return verdict;
}

}  // namespace shortcut_audit
