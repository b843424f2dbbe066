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

#include "shortcut_audit/synth.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace shortcut_audit {

using json = nlohmann::json;

std::string BackgroundToken(int index) { return absl::StrCat("w", index); }

absl::Status PlantSpec::Validate() const {
  if (token.empty()) return absl::InvalidArgumentError("empty planted token");
  const std::vector<std::string> pieces = Tokenize(token);
  if (pieces.size() != 1 || pieces[0] != token) {
    return absl::InvalidArgumentError(absl::StrCat(
        "planted token `", token, "` is not a single lowercase token"));
  }
  if (background_vocab_size < 1) {
    return absl::InvalidArgumentError("background_vocab_size must be >= 1");
  }
  for (int i = 0; i < background_vocab_size; ++i) {
    if (BackgroundToken(i) == token) {
      return absl::InvalidArgumentError(
          "planted token collides with the background vocabulary");
    }
  }
  const std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2 || distinct.size() != labels.size()) {
    return absl::InvalidArgumentError("need at least two distinct labels");
  }
  if (!distinct.contains(label)) {
    return absl::InvalidArgumentError(
        absl::StrCat("planted label `", label, "` is not among the labels"));
  }
  if (!(co_occurrence_rate > 0.0 && co_occurrence_rate <= 1.0)) {
    return absl::InvalidArgumentError("co_occurrence_rate must lie in (0, 1]");
  }
  if (!(leak_rate >= 0.0 && leak_rate < 1.0)) {
    return absl::InvalidArgumentError("leak_rate must lie in [0, 1)");
  }
  if (min_length < 1 || max_length < min_length) {
    return absl::InvalidArgumentError("invalid sample length range");
  }
  if (background_vocab_size < max_length) {
    return absl::InvalidArgumentError(
        "background vocabulary smaller than the sample length");
  }
  if (samples_per_label < 1) {
    return absl::InvalidArgumentError("samples_per_label must be >= 1");
  }
  return absl::OkStatus();
}

json PlantSpec::ToJson() const {
  return {{"token", token},
          {"label", label},
          {"labels", labels},
          {"co_occurrence_rate", co_occurrence_rate},
          {"leak_rate", leak_rate},
          {"background_vocab_size", background_vocab_size},
          {"min_length", min_length},
          {"max_length", max_length},
          {"samples_per_label", samples_per_label},
          {"seed", seed}};
}

absl::StatusOr<PlantSpec> PlantSpec::FromJson(const json& value) {
  if (!value.is_object()) {
    return absl::InvalidArgumentError("plant spec must be a JSON object");
  }
  PlantSpec spec;
  try {
    spec.token = value.value("token", spec.token);
    spec.label = value.value("label", spec.label);
    spec.labels = value.value("labels", spec.labels);
    spec.co_occurrence_rate =
        value.value("co_occurrence_rate", spec.co_occurrence_rate);
    spec.leak_rate = value.value("leak_rate", spec.leak_rate);
    spec.background_vocab_size =
        value.value("background_vocab_size", spec.background_vocab_size);
    spec.min_length = value.value("min_length", spec.min_length);
    spec.max_length = value.value("max_length", spec.max_length);
    spec.samples_per_label =
        value.value("samples_per_label", spec.samples_per_label);
    spec.seed = value.value("seed", spec.seed);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed plant spec: ", e.what()));
  }
  if (auto status = spec.Validate(); !status.ok()) return status;
  return spec;
}

absl::StatusOr<Corpus> Generate(const PlantSpec& spec) {
  if (auto status = spec.Validate(); !status.ok()) return status;
  Rng rng(spec.seed);
  std::vector<int> pool(spec.background_vocab_size);
  for (int i = 0; i < spec.background_vocab_size; ++i) pool[i] = i;

  std::vector<Sample> samples;
  samples.reserve(spec.labels.size() * spec.samples_per_label);
  for (const std::string& label : spec.labels) {
    const double plant_rate =
        label == spec.label ? spec.co_occurrence_rate : spec.leak_rate;
    for (int i = 0; i < spec.samples_per_label; ++i) {
      const int length =
          spec.min_length +
          static_cast<int>(rng.UniformInt(spec.max_length - spec.min_length + 1));
      // Partial Fisher-Yates: distinct background words per sample.
      std::vector<std::string> tokens;
      tokens.reserve(length + 1);
      for (int j = 0; j < length; ++j) {
        const size_t pick = j + rng.UniformInt(pool.size() - j);
        std::swap(pool[j], pool[pick]);
        tokens.push_back(BackgroundToken(pool[j]));
      }
      if (rng.Bernoulli(plant_rate)) {
        const auto position = static_cast<long>(rng.UniformInt(tokens.size() + 1));
        tokens.insert(tokens.begin() + position, spec.token);
      }
      Sample sample;
      sample.id = absl::StrCat(samples.size());
      sample.text = absl::StrJoin(tokens, " ");
      sample.tokens = std::move(tokens);
      sample.label = label;
      samples.push_back(std::move(sample));
    }
  }
  return Corpus::FromSamples(std::move(samples));
}

absl::StatusOr<std::vector<PredictionRecord>> SynthPredictions(
    int n, const ConfidenceLaw& confidence_law,
    const AccuracyLaw& accuracy_law, uint64_t seed) {
  if (n < 0) return absl::InvalidArgumentError("n must be non-negative");
  Rng rng(seed);
  std::vector<PredictionRecord> records;
  records.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double confidence = confidence_law(rng);
    if (!(confidence > 0.0 && confidence <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("confidence law produced ", confidence));
    }
    const double accuracy = std::clamp(accuracy_law(confidence), 0.0, 1.0);
    const bool correct = rng.Bernoulli(accuracy);

    auto classes = static_cast<size_t>(std::max(2.0, std::ceil(1.0 / confidence)));
    while ((1.0 - confidence) / static_cast<double>(classes - 1) > confidence) {
      ++classes;
    }
    PredictionRecord record;
    record.sample_id = absl::StrCat(i);
    record.probs.assign(classes, (1.0 - confidence) / (classes - 1));
    record.probs[0] = confidence;
    for (size_t c = 0; c < classes; ++c) record.class_labels.push_back(absl::StrCat(c));
    record.predicted_label = "0";
    record.true_label = correct ? "0" : "1";
    record.confidence = confidence;
    record.correct = correct;
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace shortcut_audit
