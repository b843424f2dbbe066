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

#ifndef SHORTCUT_AUDIT_METRICS_H_
#define SHORTCUT_AUDIT_METRICS_H_

#include <optional>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/statusor.h"
#include "shortcut_audit/calibration.h"

namespace shortcut_audit {

enum class F1Averaging { kMacro, kMicro };

absl::StatusOr<F1Averaging> ParseF1Averaging(absl::string_view name);
absl::string_view F1AveragingName(F1Averaging averaging);

// F1 in percent. Macro averages per-class F1 over every label that occurs as
// a true or a predicted label.
absl::StatusOr<double> F1(const std::vector<PredictionRecord>& records,
                          F1Averaging averaging = F1Averaging::kMacro);

// Percentage of records flagged shortcut-cued. Every record needs a verdict.
absl::StatusOr<double> ShortcutPrevalence(
    const std::vector<PredictionRecord>& records);

// F1 / P_sc, both in percent. nullopt means P_sc = 0: no shortcut reliance,
// so the ratio is undefined.
absl::StatusOr<std::optional<double>> ShortcutTradeoff(double f1_percent,
                                                       double p_sc_percent);

struct TradeoffSummary {
  double f1_percent = 0.0;
  double p_sc_percent = 0.0;
  std::optional<double> t_sc;
  double ece = 0.0;

  bool operator==(const TradeoffSummary&) const = default;
};

absl::StatusOr<TradeoffSummary> Summarize(
    const std::vector<PredictionRecord>& records, int num_bins = 10,
    F1Averaging averaging = F1Averaging::kMacro);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_METRICS_H_
