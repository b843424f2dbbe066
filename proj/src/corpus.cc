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

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/match.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "shortcut_audit/random.h"

namespace shortcut_audit {
namespace {

using json = nlohmann::json;

bool IsAsciiPunct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool IsAsciiSpace(unsigned char c) { return c < 0x80 && std::isspace(c); }

// Accepts strings and integers; anything else is a schema error.
absl::StatusOr<std::string> ScalarToString(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return value.dump();
  return absl::InvalidArgumentError("expected a string");
}

struct RawRecord {
  std::string id;
  std::string text;
  std::string label;
};

absl::Status AppendRecord(RawRecord record, const TokenizerOptions& options,
                          std::vector<Sample>& samples, LoadSummary& summary) {
  ++summary.records;
  Sample sample;
  sample.tokens = Tokenize(record.text, options);
  if (sample.tokens.empty()) {
    ++summary.dropped_empty;
    return absl::OkStatus();
  }
  sample.id = std::move(record.id);
  sample.text = std::move(record.text);
  sample.label = std::move(record.label);
  samples.push_back(std::move(sample));
  return absl::OkStatus();
}

absl::Status ParseJsonl(absl::string_view content,
                        const TokenizerOptions& options,
                        std::vector<Sample>& samples, LoadSummary& summary) {
  int64_t line_index = 0;
  for (absl::string_view line : absl::StrSplit(content, '\n')) {
    const int64_t index = line_index++;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    const std::string where = absl::StrCat("line ", index + 1);
    json object = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (object.is_discarded() || !object.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": malformed JSON record"));
    }
    RawRecord record;
    for (const char* key : {"text", "label"}) {
      auto it = object.find(key);
      if (it == object.end() || it->is_null()) {
        return absl::InvalidArgumentError(
            absl::StrCat(where, ": missing field `", key, "`"));
      }
    }
    if (!object["text"].is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": field `text` must be a string"));
    }
    record.text = object["text"].get<std::string>();
    auto label = ScalarToString(object["label"]);
    if (!label.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": field `label` must be a string"));
    }
    record.label = *std::move(label);
    if (auto it = object.find("id"); it != object.end() && !it->is_null()) {
      auto id = ScalarToString(*it);
      if (!id.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat(where, ": field `id` must be a string"));
      }
      record.id = *std::move(id);
    } else {
      record.id = absl::StrCat(index);
    }
    if (auto status = AppendRecord(std::move(record), options, samples, summary);
        !status.ok()) {
      return status;
    }
  }
  return absl::OkStatus();
}

// RFC 4180 style reader. Quoted fields may contain separators, doubled
// quotes and newlines.
class CsvReader {
 public:
  explicit CsvReader(absl::string_view content) : content_(content) {}

  bool Done() const { return pos_ >= content_.size(); }
  int64_t line() const { return line_; }

  absl::StatusOr<std::vector<std::string>> NextRow() {
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    while (pos_ < content_.size()) {
      const char c = content_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < content_.size() && content_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"' && !field_started) {
        quoted = true;
        field_started = true;
      } else if (c == ',') {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
      } else if (c == '\n') {
        ++line_;
        if (!field.empty() && field.back() == '\r') field.pop_back();
        row.push_back(std::move(field));
        return row;
      } else {
        field.push_back(c);
        field_started = true;
      }
    }
    if (quoted) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_, ": unterminated quoted field"));
    }
    if (!field.empty() && field.back() == '\r') field.pop_back();
    row.push_back(std::move(field));
    return row;
  }

 private:
  absl::string_view content_;
  size_t pos_ = 0;
  int64_t line_ = 1;
};

bool IsBlankRow(const std::vector<std::string>& row) {
  return row.size() == 1 && absl::StripAsciiWhitespace(row[0]).empty();
}

absl::Status ParseCsv(absl::string_view content,
                      const TokenizerOptions& options,
                      std::vector<Sample>& samples, LoadSummary& summary) {
  CsvReader reader(content);
  if (reader.Done()) return absl::OkStatus();
  auto header = reader.NextRow();
  if (!header.ok()) return header.status();
  int text_col = -1, label_col = -1, id_col = -1;
  for (int i = 0; i < static_cast<int>(header->size()); ++i) {
    const std::string name(absl::StripAsciiWhitespace((*header)[i]));
    if (name == "text") text_col = i;
    if (name == "label") label_col = i;
    if (name == "id") id_col = i;
  }
  if (text_col < 0 || label_col < 0) {
    return absl::InvalidArgumentError(
        "line 1: CSV header must contain `text` and `label` columns");
  }
  const size_t width = header->size();
  int64_t record_index = 0;
  while (!reader.Done()) {
    const int64_t line = reader.line();
    auto row = reader.NextRow();
    if (!row.ok()) return row.status();
    if (IsBlankRow(*row)) continue;
    if (row->size() != width) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line, ": expected ", width, " fields, got ",
                       row->size()));
    }
    RawRecord record;
    record.text = (*row)[text_col];
    record.label = (*row)[label_col];
    record.id = id_col >= 0 && !(*row)[id_col].empty()
                    ? (*row)[id_col]
                    : absl::StrCat(record_index);
    ++record_index;
    if (auto status = AppendRecord(std::move(record), options, samples, summary);
        !status.ok()) {
      return status;
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::vector<std::string> Tokenize(absl::string_view text,
                                  const TokenizerOptions& options) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (IsAsciiSpace(c)) {
      flush();
    } else if (IsAsciiPunct(c)) {
      flush();
      if (c == '.' && text.substr(i, 3) == "...") {
        tokens.emplace_back("...");
        i += 2;
      } else {
        tokens.emplace_back(1, static_cast<char>(c));
      }
    } else {
      word.push_back(options.lowercase && c < 0x80
                         ? static_cast<char>(std::tolower(c))
                         : static_cast<char>(c));
    }
  }
  flush();
  return tokens;
}

absl::StatusOr<Corpus> Corpus::FromSamples(std::vector<Sample> samples) {
  if (samples.empty()) return absl::InvalidArgumentError("empty corpus");
  Corpus corpus;
  std::set<std::string> ids;
  std::set<std::string> labels;
  for (const Sample& sample : samples) {
    if (!ids.insert(sample.id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate sample id `", sample.id, "`"));
    }
    if (sample.tokens.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("sample `", sample.id, "` has no tokens"));
    }
    labels.insert(sample.label);
    for (const std::string& token : sample.tokens) {
      ++corpus.vocab_[token];
      ++corpus.token_label_counts_[sample.label][token];
      ++corpus.label_token_totals_[sample.label];
      ++corpus.total_tokens_;
    }
  }
  corpus.labels_.assign(labels.begin(), labels.end());
  corpus.samples_ = std::move(samples);
  return corpus;
}

int64_t Corpus::TokenCount(const std::string& token) const {
  auto it = vocab_.find(token);
  return it == vocab_.end() ? 0 : it->second;
}

int64_t Corpus::TokenLabelCount(const std::string& token,
                                const std::string& label) const {
  auto by_label = token_label_counts_.find(label);
  if (by_label == token_label_counts_.end()) return 0;
  auto it = by_label->second.find(token);
  return it == by_label->second.end() ? 0 : it->second;
}

bool Corpus::HasLabel(const std::string& label) const {
  return label_token_totals_.contains(label);
}

absl::StatusOr<CorpusFormat> ParseCorpusFormat(absl::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "csv") return CorpusFormat::kCsv;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown corpus format `", name, "`"));
}

CorpusFormat GuessCorpusFormat(absl::string_view path) {
  return absl::EndsWith(path, ".csv") ? CorpusFormat::kCsv : CorpusFormat::kJsonl;
}

absl::StatusOr<Corpus> ParseCorpus(absl::string_view content,
                                   CorpusFormat format,
                                   const TokenizerOptions& options,
                                   LoadSummary* summary) {
  LoadSummary local;
  LoadSummary& out = summary != nullptr ? *summary : local;
  out = {};
  std::vector<Sample> samples;
  absl::Status status = format == CorpusFormat::kJsonl
                            ? ParseJsonl(content, options, samples, out)
                            : ParseCsv(content, options, samples, out);
  if (!status.ok()) return status;
  if (samples.empty()) {
    return absl::InvalidArgumentError(
        out.dropped_empty > 0
            ? absl::StrCat("empty corpus (", out.dropped_empty,
                           " sample(s) dropped with empty tokenization)")
            : std::string("empty corpus"));
  }
  return Corpus::FromSamples(std::move(samples));
}

absl::StatusOr<Corpus> LoadCorpus(const std::string& path, CorpusFormat format,
                                  const TokenizerOptions& options,
                                  LoadSummary* summary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto corpus = ParseCorpus(buffer.str(), format, options, summary);
  if (!corpus.ok()) {
    return absl::Status(corpus.status().code(),
                        absl::StrCat(path, ": ", corpus.status().message()));
  }
  return corpus;
}

absl::StatusOr<std::pair<Corpus, Corpus>> Split(const Corpus& corpus,
                                                SplitFractions fractions,
                                                uint64_t seed) {
  if (fractions.train < 0 || fractions.test < 0 ||
      std::abs(fractions.train + fractions.test - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(
        "split fractions must be non-negative and sum to 1");
  }
  const size_t n = corpus.size();
  const auto n_train = static_cast<size_t>(std::llround(fractions.train * n));
  if (n_train == 0 || n_train >= n) {
    return absl::InvalidArgumentError("empty split");
  }
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(order);
  std::vector<Sample> train, test;
  for (size_t i = 0; i < n; ++i) {
    (i < n_train ? train : test).push_back(corpus.samples()[order[i]]);
  }
  auto train_corpus = Corpus::FromSamples(std::move(train));
  if (!train_corpus.ok()) return train_corpus.status();
  auto test_corpus = Corpus::FromSamples(std::move(test));
  if (!test_corpus.ok()) return test_corpus.status();
  return std::make_pair(*std::move(train_corpus), *std::move(test_corpus));
}

std::string CorpusToJsonl(const Corpus& corpus) {
  std::string out;
  for (const Sample& sample : corpus.samples()) {
    json line = {{"id", sample.id}, {"text", sample.text},
                 {"label", sample.label}};
    absl::StrAppend(
        &out, line.dump(-1, ' ', false, json::error_handler_t::replace), "\n");
  }
  return out;
}

}  // namespace shortcut_audit
