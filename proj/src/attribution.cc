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

#include "shortcut_audit/attribution.h"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "absl/strings/str_cat.h"

namespace shortcut_audit {

absl::StatusOr<Eigen::MatrixXd> IntegratedGradients(
    const DifferentiableClassifier& model, const Eigen::MatrixXd& input,
    const std::optional<Eigen::MatrixXd>& baseline, int target_class,
    int steps, OutputKind kind) {
  if (steps < 1) return absl::InvalidArgumentError("steps must be >= 1");
  const Eigen::MatrixXd start =
      baseline.has_value() ? *baseline
                           : Eigen::MatrixXd::Zero(input.rows(), input.cols());
  if (start.rows() != input.rows() || start.cols() != input.cols()) {
    return absl::InvalidArgumentError("baseline shape differs from input");
  }
  const Eigen::MatrixXd delta = input - start;
  Eigen::MatrixXd grad_sum = Eigen::MatrixXd::Zero(input.rows(), input.cols());
  for (int k = 1; k <= steps; ++k) {
    const Eigen::MatrixXd point =
        start + (static_cast<double>(k) / steps) * delta;
    auto outputs = model.Outputs(point, kind);
    if (!outputs.ok()) return outputs.status();
    if (!outputs->allFinite()) {
      return absl::InternalError(
          absl::StrCat("non-finite model output at path step ", k));
    }
    auto grad = model.GradWrtEmbeddings(point, target_class, kind);
    if (!grad.ok()) return grad.status();
    grad_sum += *grad;
  }
  return Eigen::MatrixXd(delta.cwiseProduct(grad_sum) / steps);
}

std::vector<double> TokenImportance(const Eigen::MatrixXd& attribution) {
  std::vector<double> importance(attribution.rows());
  for (Eigen::Index t = 0; t < attribution.rows(); ++t) {
    importance[t] = attribution.row(t).norm();
  }
  return importance;
}

std::vector<AttributedToken> TopKTokens(const std::vector<std::string>& tokens,
                                        const std::vector<double>& importance,
                                        int k) {
  const size_t n = std::min(tokens.size(), importance.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return importance[a] > importance[b];
  });
  order.resize(std::min<size_t>(n, std::max(k, 0)));
  std::vector<AttributedToken> top;
  top.reserve(order.size());
  for (int position : order) {
    top.push_back({position, tokens[position], importance[position]});
  }
  return top;
}

absl::StatusOr<AttributionResult> AttributeSample(
    const MlpClassifier& model, const Sample& sample,
    const AttributionOptions& options) {
  if (options.top_k < 1) return absl::InvalidArgumentError("top_k must be >= 1");
  const Eigen::MatrixXd input = model.Embed(sample.tokens);
  auto probs = model.Forward(input);
  if (!probs.ok()) return probs.status();
  AttributionResult result;
  result.sample_id = sample.id;
  result.probs = *probs;
  // First maximum wins, matching the label order used by the model.
  result.probs.maxCoeff(&result.predicted_class);
  result.steps = options.steps;
  auto attribution = IntegratedGradients(model, input, std::nullopt,
                                         result.predicted_class, options.steps,
                                         options.output_kind);
  if (!attribution.ok()) {
    return absl::Status(attribution.status().code(),
                        absl::StrCat("sample `", sample.id,
                                     "`: ", attribution.status().message()));
  }
  result.per_token_attribution = *std::move(attribution);
  result.token_importance = TokenImportance(result.per_token_attribution);
  result.top_tokens =
      TopKTokens(sample.tokens, result.token_importance, options.top_k);
  return result;
}

absl::StatusOr<std::vector<AttributionResult>> AttributeAll(
    const MlpClassifier& model, const std::vector<Sample>& samples,
    const AttributionOptions& options, int jobs) {
  std::vector<std::optional<absl::StatusOr<AttributionResult>>> slots(
      samples.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < samples.size(); i = next++) {
      slots[i] = AttributeSample(model, samples[i], options);
    }
  };
  const int workers =
      std::clamp<int>(jobs, 1, std::max<size_t>(samples.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  std::vector<AttributionResult> results;
  results.reserve(samples.size());
  for (auto& slot : slots) {
    if (!slot->ok()) return slot->status();
    results.push_back(*std::move(*slot));
  }
  return results;
}

}  // namespace shortcut_audit
