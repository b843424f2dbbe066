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

#ifndef SHORTCUT_AUDIT_CALIBRATION_H_
#define SHORTCUT_AUDIT_CALIBRATION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "shortcut_audit/attribution.h"
#include "shortcut_audit/shortcut.h"

namespace shortcut_audit {

// One audited prediction.
struct PredictionRecord {
  std::string sample_id;
  std::string true_label;
  std::string predicted_label;
  // Class names for `probs`, in the same order. May be empty when the
  // producer did not name its classes.
  std::vector<std::string> class_labels;
  std::vector<double> probs;
  double confidence = 0.0;  // max(probs)
  bool correct = false;
  std::vector<AttributedToken> top_tokens;
  std::optional<ShortcutVerdict> verdict;
};

// Fills confidence and correctness from the probabilities and labels.
// Fails when probs is empty, has entries outside [0, 1], or does not sum to
// one within `sum_tolerance`.
absl::StatusOr<PredictionRecord> MakeRecord(std::string sample_id,
                                            std::string true_label,
                                            std::string predicted_label,
                                            std::vector<double> probs,
                                            double sum_tolerance = 1e-6);

struct CueCounts {
  int64_t lexicon = 0;
  int64_t grammar = 0;
  int64_t non_shortcut = 0;

  int64_t total() const { return lexicon + grammar + non_shortcut; }
  bool operator==(const CueCounts&) const = default;
};

// Records without a verdict are counted as non-shortcut.
CueCounts CountCues(const std::vector<PredictionRecord>& records);

struct BinStats {
  int index = 1;  // 1-based
  double low = 0.0;
  double high = 0.0;
  int64_t count = 0;
  double accuracy = 0.0;         // 0 when empty
  double mean_confidence = 0.0;  // 0 when empty
  CueCounts cues;
};

// 1-based bin for a confidence: the m with (m-1)/M < c <= m/M, and bin 1
// for c = 0.
absl::StatusOr<int> AssignBin(double confidence, int num_bins);

// Equal-width reliability bins. Records without a verdict fall in the
// non-shortcut column.
absl::StatusOr<std::vector<BinStats>> Bin(
    const std::vector<PredictionRecord>& records, int num_bins = 10);

// sum_m |B_m|/n * |acc(B_m) - conf(B_m)|
absl::StatusOr<double> ExpectedCalibrationError(
    const std::vector<PredictionRecord>& records, int num_bins = 10);

// Per-bin cue counts. Every record must carry a verdict.
absl::StatusOr<std::vector<CueCounts>> ShortcutDistribution(
    const std::vector<PredictionRecord>& records, int num_bins = 10);

// Columns: bin_low, bin_high, count, accuracy, mean_confidence,
// lexicon_cued, grammar_cued, non_shortcut.
std::string ReliabilityCsv(const std::vector<BinStats>& bins);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_CALIBRATION_H_
