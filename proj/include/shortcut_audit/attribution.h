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

#ifndef SHORTCUT_AUDIT_ATTRIBUTION_H_
#define SHORTCUT_AUDIT_ATTRIBUTION_H_

#include <optional>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "shortcut_audit/corpus.h"
#include "shortcut_audit/model.h"

namespace shortcut_audit {

// Integrated gradients along the straight line from `baseline` (all zeros
// when unset) to `input`, approximated with a right-endpoint Riemann sum:
//
//   (input - baseline) * (1/m) * sum_{k=1..m} grad F(baseline + k/m (input - baseline))
//
// where F is output `target_class` of kind `kind`.
absl::StatusOr<Eigen::MatrixXd> IntegratedGradients(
    const DifferentiableClassifier& model, const Eigen::MatrixXd& input,
    const std::optional<Eigen::MatrixXd>& baseline, int target_class,
    int steps, OutputKind kind);

// Row-wise L2 norm: one importance per token.
std::vector<double> TokenImportance(const Eigen::MatrixXd& attribution);

struct AttributedToken {
  int position = 0;
  std::string token;
  double importance = 0.0;
};

// The k most important positions, descending; ties go to the earlier
// position. Repeated strings stay separate entries.
std::vector<AttributedToken> TopKTokens(const std::vector<std::string>& tokens,
                                        const std::vector<double>& importance,
                                        int k = 3);

struct AttributionOptions {
  int steps = 50;
  int top_k = 3;
  OutputKind output_kind = OutputKind::kProbability;
};

struct AttributionResult {
  std::string sample_id;
  int predicted_class = 0;
  Eigen::VectorXd probs;
  int steps = 0;
  Eigen::MatrixXd per_token_attribution;
  std::vector<double> token_importance;
  std::vector<AttributedToken> top_tokens;
};

// Predicts `sample` and attributes the predicted class to its tokens.
absl::StatusOr<AttributionResult> AttributeSample(
    const MlpClassifier& model, const Sample& sample,
    const AttributionOptions& options = {});

// Runs AttributeSample over all samples with up to `jobs` worker threads.
// Output order follows `samples` and does not depend on `jobs`.
absl::StatusOr<std::vector<AttributionResult>> AttributeAll(
    const MlpClassifier& model, const std::vector<Sample>& samples,
    const AttributionOptions& options, int jobs = 1);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_ATTRIBUTION_H_
