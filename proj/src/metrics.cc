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

#include "shortcut_audit/metrics.h"

#include <map>
#include <set>

#include "absl/strings/str_cat.h"

namespace shortcut_audit {

absl::StatusOr<F1Averaging> ParseF1Averaging(absl::string_view name) {
  if (name == "macro") return F1Averaging::kMacro;
  if (name == "micro") return F1Averaging::kMicro;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown F1 averaging `", name, "`"));
}

absl::string_view F1AveragingName(F1Averaging averaging) {
  return averaging == F1Averaging::kMacro ? "macro" : "micro";
}

absl::StatusOr<double> F1(const std::vector<PredictionRecord>& records,
                          F1Averaging averaging) {
  if (records.empty()) return absl::InvalidArgumentError("no records");
  struct Confusion {
    int64_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Confusion> per_class;
  for (const PredictionRecord& r : records) {
    if (r.predicted_label == r.true_label) {
      ++per_class[r.true_label].tp;
    } else {
      ++per_class[r.predicted_label].fp;
      ++per_class[r.true_label].fn;
    }
  }
  if (averaging == F1Averaging::kMicro) {
    Confusion total;
    for (const auto& [label, c] : per_class) {
      total.tp += c.tp;
      total.fp += c.fp;
      total.fn += c.fn;
    }
    return 100.0 * 2.0 * total.tp / (2.0 * total.tp + total.fp + total.fn);
  }
  double sum = 0.0;
  for (const auto& [label, c] : per_class) {
    sum += 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn);
  }
  return 100.0 * sum / static_cast<double>(per_class.size());
}

absl::StatusOr<double> ShortcutPrevalence(
    const std::vector<PredictionRecord>& records) {
  if (records.empty()) return absl::InvalidArgumentError("no records");
  int64_t flagged = 0;
  for (const PredictionRecord& r : records) {
    if (!r.verdict.has_value()) {
      return absl::FailedPreconditionError("verdicts required");
    }
    if (r.verdict->is_shortcut) ++flagged;
  }
  return 100.0 * static_cast<double>(flagged) /
         static_cast<double>(records.size());
}

absl::StatusOr<std::optional<double>> ShortcutTradeoff(double f1_percent,
                                                       double p_sc_percent) {
  if (!(f1_percent >= 0.0 && f1_percent <= 100.0) ||
      !(p_sc_percent >= 0.0 && p_sc_percent <= 100.0)) {
    return absl::InvalidArgumentError("F1 and P_sc must lie in [0, 100]");
  }
  if (p_sc_percent == 0.0) return std::optional<double>();
  return std::optional<double>(f1_percent / p_sc_percent);
}

absl::StatusOr<TradeoffSummary> Summarize(
    const std::vector<PredictionRecord>& records, int num_bins,
    F1Averaging averaging) {
  TradeoffSummary summary;
  auto f1 = F1(records, averaging);
  if (!f1.ok()) return f1.status();
  auto p_sc = ShortcutPrevalence(records);
  if (!p_sc.ok()) return p_sc.status();
  auto t_sc = ShortcutTradeoff(*f1, *p_sc);
  if (!t_sc.ok()) return t_sc.status();
  auto ece = ExpectedCalibrationError(records, num_bins);
  if (!ece.ok()) return ece.status();
  summary.f1_percent = *f1;
  summary.p_sc_percent = *p_sc;
  summary.t_sc = *t_sc;
  summary.ece = *ece;
  return summary;
}

}  // namespace shortcut_audit
