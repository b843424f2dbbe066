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

#ifndef SHORTCUT_AUDIT_SYNTH_H_
#define SHORTCUT_AUDIT_SYNTH_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "shortcut_audit/calibration.h"
#include "shortcut_audit/corpus.h"
#include "shortcut_audit/random.h"

namespace shortcut_audit {

// A corpus of label-independent background words with one planted token
// that co-occurs with `label`.
struct PlantSpec {
  std::string token = "zzplant";
  std::string label = "pos";
  std::vector<std::string> labels = {"neg", "pos"};
  double co_occurrence_rate = 0.95;  // share of `label` samples with token
  double leak_rate = 0.05;           // share of other samples with token
  int background_vocab_size = 200;
  int min_length = 8;
  int max_length = 16;
  int samples_per_label = 1000;
  uint64_t seed = 0;

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
  // Keys absent from `value` keep their defaults.
  static absl::StatusOr<PlantSpec> FromJson(const nlohmann::json& value);
};

// Background words are "w0" .. "w{n-1}".
std::string BackgroundToken(int index);

absl::StatusOr<Corpus> Generate(const PlantSpec& spec);

using ConfidenceLaw = std::function<double(Rng&)>;
using AccuracyLaw = std::function<double(double confidence)>;

// Synthetic predictions with confidence drawn from `confidence_law` and
// correctness ~ Bernoulli(accuracy_law(confidence)). Each record uses the
// fewest classes that let its confidence be the top probability; the
// remaining mass is spread evenly over the other classes. Confidences must
// be in (0, 1]; accuracies are clipped to [0, 1].
absl::StatusOr<std::vector<PredictionRecord>> SynthPredictions(
    int n, const ConfidenceLaw& confidence_law,
    const AccuracyLaw& accuracy_law, uint64_t seed);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_SYNTH_H_
