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

#include "shortcut_audit/calibration.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace shortcut_audit {
namespace {

void AddCue(const PredictionRecord& record, CueCounts& counts) {
  const CueType type =
      record.verdict.has_value() ? record.verdict->cue_type : CueType::kNone;
  switch (type) {
    case CueType::kLexicon:
      ++counts.lexicon;
      break;
    case CueType::kGrammar:
      ++counts.grammar;
      break;
    case CueType::kNone:
      ++counts.non_shortcut;
      break;
  }
}

double BinEdge(int m, int num_bins) {
  return static_cast<double>(m) / static_cast<double>(num_bins);
}

}  // namespace

absl::StatusOr<PredictionRecord> MakeRecord(std::string sample_id,
                                            std::string true_label,
                                            std::string predicted_label,
                                            std::vector<double> probs,
                                            double sum_tolerance) {
  if (probs.empty()) {
    return absl::InvalidArgumentError("empty probability vector");
  }
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("probability ", p, " outside [0, 1]"));
    }
  }
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(sum - 1.0) >= sum_tolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("probabilities sum to ", sum));
  }
  PredictionRecord record;
  record.confidence = *std::max_element(probs.begin(), probs.end());
  record.correct = predicted_label == true_label;
  record.sample_id = std::move(sample_id);
  record.true_label = std::move(true_label);
  record.predicted_label = std::move(predicted_label);
  record.probs = std::move(probs);
  return record;
}

CueCounts CountCues(const std::vector<PredictionRecord>& records) {
  CueCounts counts;
  for (const PredictionRecord& record : records) AddCue(record, counts);
  return counts;
}

absl::StatusOr<int> AssignBin(double confidence, int num_bins) {
  if (num_bins < 1) return absl::InvalidArgumentError("bins must be >= 1");
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("confidence ", confidence, " outside [0, 1]"));
  }
  if (confidence == 0.0) return 1;
  // ceil(c * M) can land one bin off when the product rounds across an
  // integer; the edge comparisons below settle it against m / M.
  int m = static_cast<int>(std::ceil(confidence * num_bins));
  m = std::clamp(m, 1, num_bins);
  while (m > 1 && confidence <= BinEdge(m - 1, num_bins)) --m;
  while (m < num_bins && confidence > BinEdge(m, num_bins)) ++m;
  return m;
}

absl::StatusOr<std::vector<BinStats>> Bin(
    const std::vector<PredictionRecord>& records, int num_bins) {
  if (num_bins < 1) return absl::InvalidArgumentError("bins must be >= 1");
  std::vector<BinStats> bins(num_bins);
  std::vector<int64_t> correct_count(num_bins, 0);
  std::vector<std::vector<double>> confidences(num_bins);
  for (int m = 0; m < num_bins; ++m) {
    bins[m].index = m + 1;
    bins[m].low = BinEdge(m, num_bins);
    bins[m].high = BinEdge(m + 1, num_bins);
  }
  for (const PredictionRecord& record : records) {
    auto m = AssignBin(record.confidence, num_bins);
    if (!m.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "record `", record.sample_id, "`: ", m.status().message()));
    }
    BinStats& bin = bins[*m - 1];
    ++bin.count;
    if (record.correct) ++correct_count[*m - 1];
    confidences[*m - 1].push_back(record.confidence);
    AddCue(record, bin.cues);
  }
  for (int m = 0; m < num_bins; ++m) {
    if (bins[m].count == 0) continue;
    // Summing in sorted order keeps the result independent of record order.
    std::sort(confidences[m].begin(), confidences[m].end());
    const double confidence_sum =
        std::accumulate(confidences[m].begin(), confidences[m].end(), 0.0);
    const auto count = static_cast<double>(bins[m].count);
    bins[m].accuracy = static_cast<double>(correct_count[m]) / count;
    bins[m].mean_confidence = confidence_sum / count;
  }
  return bins;
}

absl::StatusOr<double> ExpectedCalibrationError(
    const std::vector<PredictionRecord>& records, int num_bins) {
  if (records.empty()) return absl::InvalidArgumentError("no records");
  auto bins = Bin(records, num_bins);
  if (!bins.ok()) return bins.status();
  const auto n = static_cast<double>(records.size());
  double ece = 0.0;
  for (const BinStats& bin : *bins) {
    if (bin.count == 0) continue;
    ece += (static_cast<double>(bin.count) / n) *
           std::abs(bin.accuracy - bin.mean_confidence);
  }
  return ece;
}

absl::StatusOr<std::vector<CueCounts>> ShortcutDistribution(
    const std::vector<PredictionRecord>& records, int num_bins) {
  for (const PredictionRecord& record : records) {
    if (!record.verdict.has_value()) {
      return absl::FailedPreconditionError(
          absl::StrCat("record `", record.sample_id, "` has no verdict"));
    }
  }
  auto bins = Bin(records, num_bins);
  if (!bins.ok()) return bins.status();
  std::vector<CueCounts> counts;
  counts.reserve(bins->size());
  for (const BinStats& bin : *bins) counts.push_back(bin.cues);
  return counts;
}

std::string ReliabilityCsv(const std::vector<BinStats>& bins) {
  std::string out =
      "bin_low,bin_high,count,accuracy,mean_confidence,lexicon_cued,"
      "grammar_cued,non_shortcut\n";
  for (const BinStats& bin : bins) {
    absl::StrAppendFormat(&out, "%.12g,%.12g,%d,%.12g,%.12g,%d,%d,%d\n",
                          bin.low, bin.high, bin.count, bin.accuracy,
                          bin.mean_confidence, bin.cues.lexicon,
                          bin.cues.grammar, bin.cues.non_shortcut);
  }
  return out;
}

}  // namespace shortcut_audit
