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

#ifndef SHORTCUT_AUDIT_REPORT_H_
#define SHORTCUT_AUDIT_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "shortcut_audit/attribution.h"
#include "shortcut_audit/calibration.h"
#include "shortcut_audit/lmi.h"
#include "shortcut_audit/metrics.h"
#include "shortcut_audit/model.h"
#include "shortcut_audit/shortcut.h"

namespace shortcut_audit {

inline constexpr absl::string_view kToolVersion = "0.1.0";

// Every knob that affects an audit's numbers.
struct AuditConfig {
  int bins = 10;
  int top_k = 3;
  double head_fraction = 0.05;
  MatchMode match_mode = MatchMode::kAny;
  int ig_steps = 50;
  uint64_t seed = 0;
  LmiNormalizer normalizer = LmiNormalizer::kTotalTokens;
  OutputKind output_kind = OutputKind::kProbability;
  F1Averaging averaging = F1Averaging::kMacro;
  std::string stopwords = "default";

  nlohmann::json ToJson() const;
  static absl::StatusOr<AuditConfig> FromJson(const nlohmann::json& value);
};

struct AuditReport {
  std::string dataset;
  std::string model;
  int64_t n = 0;
  TradeoffSummary summary;
  std::vector<BinStats> bins;
  CueCounts cue_totals;
  AuditConfig config;
  std::string tool_version{kToolVersion};
  std::vector<PredictionRecord> records;

  nlohmann::json ToJson() const;
  static absl::StatusOr<AuditReport> FromJson(const nlohmann::json& value);
  // Pretty-printed JSON with a trailing newline.
  std::string Serialize() const;
  static absl::StatusOr<AuditReport> Parse(absl::string_view text);
};

// Computes every summary field from `records`, which must all carry
// verdicts.
absl::StatusOr<AuditReport> Assemble(std::vector<PredictionRecord> records,
                                     const AuditConfig& config,
                                     std::string dataset, std::string model);

struct BinDelta {
  int index = 1;
  int64_t count = 0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
  int64_t lexicon = 0;
  int64_t grammar = 0;
  int64_t non_shortcut = 0;
};

// after - before, field by field.
struct ReportDelta {
  std::string dataset;
  double ece = 0.0;
  double p_sc = 0.0;
  double f1 = 0.0;
  // Unset when either side has no T_sc.
  std::optional<double> t_sc;
  std::vector<BinDelta> bins;

  nlohmann::json ToJson() const;
};

// Requires the same dataset name and bin count on both sides.
absl::StatusOr<ReportDelta> Diff(const AuditReport& before,
                                 const AuditReport& after);

// Field-wise mean of the reports' summaries. T_sc averages the reports that
// define it.
absl::StatusOr<TradeoffSummary> MeanSummary(
    const std::vector<AuditReport>& reports);

// Table-shaped CSV: model,dataset,P_sc,T_sc,ECE,F1.
std::string SummaryCsv(const std::vector<AuditReport>& reports);

nlohmann::json RecordToJson(const PredictionRecord& record);

// Attribution export, one line per record:
// {id, true_label, predicted_label, labels, probs, top_tokens, steps_m}.
std::string ExportAttributionsJsonl(const std::vector<PredictionRecord>& records,
                                    int steps);

// Parses predictions produced by external tooling in the attribution export
// schema. `probs` may be an array (named by an optional `labels` array,
// otherwise by index) or a {label: probability} object. Verdicts are left
// unset.
absl::StatusOr<std::vector<PredictionRecord>> ParseExternalPredictions(
    absl::string_view content);
absl::StatusOr<std::vector<PredictionRecord>> ImportExternal(
    const std::string& path);

// Builds records for `samples` by predicting and attributing with `model`.
absl::StatusOr<std::vector<PredictionRecord>> PredictAndAttribute(
    const MlpClassifier& model, const std::vector<Sample>& samples,
    const AttributionOptions& options, int jobs = 1);

// Sets each record's verdict from its top tokens and the head of its
// predicted label.
absl::Status AttachVerdicts(std::vector<PredictionRecord>& records,
                            const LmiTable& table, MatchMode mode,
                            const CueLexicon& cues);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_REPORT_H_
