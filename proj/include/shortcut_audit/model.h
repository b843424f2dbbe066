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

#ifndef SHORTCUT_AUDIT_MODEL_H_
#define SHORTCUT_AUDIT_MODEL_H_

#include <cstdint>
#include <map>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "shortcut_audit/corpus.h"

namespace shortcut_audit {

// Which scalar of the classifier is differentiated and attributed.
enum class OutputKind { kProbability, kLogit };

absl::StatusOr<OutputKind> ParseOutputKind(absl::string_view name);
absl::string_view OutputKindName(OutputKind kind);

// What the attribution engine needs from a model: per-class outputs for a
// T x dim matrix of token embeddings and the gradient of one of them with
// respect to that matrix. Implementations must be safe for concurrent
// const calls.
class DifferentiableClassifier {
 public:
  virtual ~DifferentiableClassifier() = default;

  virtual int num_classes() const = 0;
  virtual int embedding_dim() const = 0;

  virtual absl::StatusOr<Eigen::VectorXd> Outputs(
      const Eigen::MatrixXd& token_embeddings, OutputKind kind) const = 0;

  virtual absl::StatusOr<Eigen::MatrixXd> GradWrtEmbeddings(
      const Eigen::MatrixXd& token_embeddings, int target_class,
      OutputKind kind) const = 0;

  absl::StatusOr<Eigen::VectorXd> Forward(
      const Eigen::MatrixXd& token_embeddings) const {
    return Outputs(token_embeddings, OutputKind::kProbability);
  }
};

// embedding -> mean-pool -> ReLU hidden layer -> softmax.
struct ClassifierParams {
  Eigen::MatrixXd embeddings;      // vocab_size x dim, row j = e(w_j)
  Eigen::MatrixXd hidden_weights;  // dim x hidden
  Eigen::VectorXd hidden_bias;     // hidden
  Eigen::MatrixXd output_weights;  // hidden x classes
  Eigen::VectorXd output_bias;     // classes

  int vocab_size() const { return static_cast<int>(embeddings.rows()); }
  int dim() const { return static_cast<int>(embeddings.cols()); }
  int hidden() const { return static_cast<int>(hidden_weights.cols()); }
  int num_classes() const { return static_cast<int>(output_bias.size()); }

  static ClassifierParams Zeros(int vocab_size, int dim, int hidden,
                                int num_classes);
  absl::Status Validate() const;
  bool AllFinite() const;
  double SquaredNorm() const;
};

// Softmax probabilities over classes.
absl::StatusOr<Eigen::VectorXd> Forward(const ClassifierParams& params,
                                        const Eigen::MatrixXd& token_embeddings);

absl::StatusOr<Eigen::VectorXd> Logits(const ClassifierParams& params,
                                       const Eigen::MatrixXd& token_embeddings);

// Analytic d(output[target_class]) / d(token_embeddings).
absl::StatusOr<Eigen::MatrixXd> GradWrtEmbeddings(
    const ClassifierParams& params, const Eigen::MatrixXd& token_embeddings,
    int target_class, OutputKind kind);

struct TrainConfig {
  double learning_rate = 1e-5;
  double adam_epsilon = 1e-8;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  int batch_size = 32;
  int epochs = 3;
  double grad_clip_norm = 1.0;
  uint64_t seed = 0;
  int embedding_dim = 64;
  int hidden_dim = 128;
  double init_range = 0.05;

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
  // Keys absent from `value` keep their defaults.
  static absl::StatusOr<TrainConfig> FromJson(const nlohmann::json& value);
};

// Scales every gradient so the global L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double ClipGlobalNorm(ClassifierParams& grads, double max_norm);

// Reference classifier with its token vocabulary and label names.
class MlpClassifier : public DifferentiableClassifier {
 public:
  static constexpr absl::string_view kUnknownToken = "<unk>";
  static constexpr int kCheckpointVersion = 1;

  // `vocabulary[0]` must be kUnknownToken.
  static absl::StatusOr<MlpClassifier> Create(
      std::vector<std::string> vocabulary, std::vector<std::string> labels,
      ClassifierParams params, TrainConfig config = {});

  int num_classes() const override { return params_.num_classes(); }
  int embedding_dim() const override { return params_.dim(); }

  absl::StatusOr<Eigen::VectorXd> Outputs(const Eigen::MatrixXd& token_embeddings,
                                          OutputKind kind) const override;
  absl::StatusOr<Eigen::MatrixXd> GradWrtEmbeddings(
      const Eigen::MatrixXd& token_embeddings, int target_class,
      OutputKind kind) const override;

  // Row ids for tokens; unseen tokens map to the unknown row 0.
  std::vector<int> TokenIds(const std::vector<std::string>& tokens) const;
  // T x dim matrix of embedding rows.
  Eigen::MatrixXd Embed(const std::vector<std::string>& tokens) const;

  const ClassifierParams& params() const { return params_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const TrainConfig& config() const { return config_; }
  int LabelIndex(const std::string& label) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<MlpClassifier> FromJson(const nlohmann::json& value);
  absl::Status Save(const std::string& path) const;
  static absl::StatusOr<MlpClassifier> Load(const std::string& path);

 private:
  MlpClassifier() = default;

  std::vector<std::string> vocabulary_;
  std::map<std::string, int, std::less<>> token_ids_;
  std::vector<std::string> labels_;
  ClassifierParams params_;
  TrainConfig config_;
};

struct TrainResult {
  MlpClassifier model;
  // Mean training cross-entropy at initialization, then after each epoch.
  std::vector<double> loss_trace;
};

// Mini-batch Adam with global-norm clipping. Fully determined by the corpus
// and config.seed.
absl::StatusOr<TrainResult> Train(const Corpus& corpus,
                                  const TrainConfig& config);

// Mean cross-entropy of `model` over the corpus samples.
double MeanCrossEntropy(const MlpClassifier& model, const Corpus& corpus);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_MODEL_H_
