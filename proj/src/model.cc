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

#include "shortcut_audit/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "shortcut_audit/random.h"

namespace shortcut_audit {
namespace {

using json = nlohmann::json;

absl::Status CheckInput(const ClassifierParams& params,
                        const Eigen::MatrixXd& x) {
  if (x.rows() < 1) {
    return absl::InvalidArgumentError("input must contain at least one token");
  }
  if (x.cols() != params.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("embedding width ", x.cols(), " does not match model dim ",
                     params.dim()));
  }
  return absl::OkStatus();
}

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits) {
  const double shift = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - shift).exp();
  return p / p.sum();
}

// Intermediate values of one forward pass.
struct Activations {
  Eigen::VectorXd pooled;
  Eigen::VectorXd pre_hidden;
  Eigen::VectorXd hidden;
  Eigen::VectorXd logits;
};

Activations Run(const ClassifierParams& params, const Eigen::MatrixXd& x) {
  Activations act;
  act.pooled = x.colwise().mean().transpose();
  act.pre_hidden =
      params.hidden_weights.transpose() * act.pooled + params.hidden_bias;
  act.hidden = act.pre_hidden.cwiseMax(0.0);
  act.logits = params.output_weights.transpose() * act.hidden + params.output_bias;
  return act;
}

// Backpropagates d(scalar)/d(logits) down to d(scalar)/d(pooled input).
Eigen::VectorXd PooledGradient(const ClassifierParams& params,
                               const Activations& act,
                               const Eigen::VectorXd& grad_logits) {
  Eigen::VectorXd grad_hidden = params.output_weights * grad_logits;
  Eigen::VectorXd grad_pre =
      (act.pre_hidden.array() > 0.0).select(grad_hidden, 0.0);
  return params.hidden_weights * grad_pre;
}

json MatrixToJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json VectorToJson(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::MatrixXd MatrixFromJson(const json& rows, Eigen::Index n_rows,
                               Eigen::Index n_cols) {
  if (static_cast<Eigen::Index>(rows.size()) != n_rows) {
    throw std::invalid_argument("matrix row count mismatch");
  }
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const json& row = rows.at(r);
    if (static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw std::invalid_argument("matrix column count mismatch");
    }
    for (Eigen::Index c = 0; c < n_cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

Eigen::VectorXd VectorFromJson(const json& values, Eigen::Index size) {
  if (static_cast<Eigen::Index>(values.size()) != size) {
    throw std::invalid_argument("vector size mismatch");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = values.at(i).get<double>();
  return v;
}

void FillUniform(Eigen::MatrixXd& m, double range, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.Uniform(-range, range);
  }
}

void FillUniform(Eigen::VectorXd& v, double range, Rng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.Uniform(-range, range);
}

// Adam first and second moment estimates for every parameter block.
struct AdamState {
  ClassifierParams m;
  ClassifierParams v;
  int64_t step = 0;
};

template <typename Block>
void AdamUpdate(Block& param, const Block& grad, Block& m, Block& v,
                const TrainConfig& config, double bias1, double bias2) {
  m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * grad;
  v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * grad.cwiseAbs2();
  param.array() -= config.learning_rate * (m.array() / bias1) /
                   ((v.array() / bias2).sqrt() + config.adam_epsilon);
}

void AdamStep(ClassifierParams& params, const ClassifierParams& grads,
              AdamState& state, const TrainConfig& config) {
  ++state.step;
  const double bias1 = 1.0 - std::pow(config.adam_beta1, state.step);
  const double bias2 = 1.0 - std::pow(config.adam_beta2, state.step);
  AdamUpdate(params.embeddings, grads.embeddings, state.m.embeddings,
             state.v.embeddings, config, bias1, bias2);
  AdamUpdate(params.hidden_weights, grads.hidden_weights,
             state.m.hidden_weights, state.v.hidden_weights, config, bias1,
             bias2);
  AdamUpdate(params.hidden_bias, grads.hidden_bias, state.m.hidden_bias,
             state.v.hidden_bias, config, bias1, bias2);
  AdamUpdate(params.output_weights, grads.output_weights,
             state.m.output_weights, state.v.output_weights, config, bias1,
             bias2);
  AdamUpdate(params.output_bias, grads.output_bias, state.m.output_bias,
             state.v.output_bias, config, bias1, bias2);
}

// Adds the cross-entropy gradient of one sample to `grads` and returns its
// loss.
double AccumulateSampleGradient(const ClassifierParams& params,
                                const std::vector<int>& ids, int label,
                                ClassifierParams& grads) {
  Eigen::MatrixXd x(ids.size(), params.dim());
  for (size_t t = 0; t < ids.size(); ++t) x.row(t) = params.embeddings.row(ids[t]);
  const Activations act = Run(params, x);
  const Eigen::VectorXd p = Softmax(act.logits);

  Eigen::VectorXd grad_logits = p;
  grad_logits(label) -= 1.0;
  grads.output_weights.noalias() += act.hidden * grad_logits.transpose();
  grads.output_bias += grad_logits;
  Eigen::VectorXd grad_hidden = params.output_weights * grad_logits;
  Eigen::VectorXd grad_pre =
      (act.pre_hidden.array() > 0.0).select(grad_hidden, 0.0);
  grads.hidden_weights.noalias() += act.pooled * grad_pre.transpose();
  grads.hidden_bias += grad_pre;
  const Eigen::VectorXd grad_pooled = params.hidden_weights * grad_pre;
  const Eigen::RowVectorXd per_token =
      grad_pooled.transpose() / static_cast<double>(ids.size());
  for (int id : ids) grads.embeddings.row(id) += per_token;
  return -std::log(std::max(p(label), 1e-300));
}

}  // namespace

absl::StatusOr<OutputKind> ParseOutputKind(absl::string_view name) {
  if (name == "probability") return OutputKind::kProbability;
  if (name == "logit") return OutputKind::kLogit;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown output kind `", name, "`"));
}

absl::string_view OutputKindName(OutputKind kind) {
  return kind == OutputKind::kProbability ? "probability" : "logit";
}

ClassifierParams ClassifierParams::Zeros(int vocab_size, int dim, int hidden,
                                         int num_classes) {
  ClassifierParams p;
  p.embeddings = Eigen::MatrixXd::Zero(vocab_size, dim);
  p.hidden_weights = Eigen::MatrixXd::Zero(dim, hidden);
  p.hidden_bias = Eigen::VectorXd::Zero(hidden);
  p.output_weights = Eigen::MatrixXd::Zero(hidden, num_classes);
  p.output_bias = Eigen::VectorXd::Zero(num_classes);
  return p;
}

absl::Status ClassifierParams::Validate() const {
  if (embeddings.rows() < 1 || embeddings.cols() < 1) {
    return absl::InvalidArgumentError("empty embedding matrix");
  }
  if (hidden_weights.rows() != dim() || hidden_bias.size() != hidden() ||
      output_weights.rows() != hidden() || output_weights.cols() != num_classes()) {
    return absl::InvalidArgumentError("inconsistent parameter dimensions");
  }
  if (num_classes() < 1) return absl::InvalidArgumentError("no classes");
  if (!AllFinite()) return absl::InvalidArgumentError("non-finite parameters");
  return absl::OkStatus();
}

bool ClassifierParams::AllFinite() const {
  return embeddings.allFinite() && hidden_weights.allFinite() &&
         hidden_bias.allFinite() && output_weights.allFinite() &&
         output_bias.allFinite();
}

double ClassifierParams::SquaredNorm() const {
  return embeddings.squaredNorm() + hidden_weights.squaredNorm() +
         hidden_bias.squaredNorm() + output_weights.squaredNorm() +
         output_bias.squaredNorm();
}

absl::StatusOr<Eigen::VectorXd> Logits(const ClassifierParams& params,
                                       const Eigen::MatrixXd& x) {
  if (auto status = CheckInput(params, x); !status.ok()) return status;
  return Run(params, x).logits;
}

absl::StatusOr<Eigen::VectorXd> Forward(const ClassifierParams& params,
                                        const Eigen::MatrixXd& x) {
  auto logits = Logits(params, x);
  if (!logits.ok()) return logits.status();
  return Softmax(*logits);
}

absl::StatusOr<Eigen::MatrixXd> GradWrtEmbeddings(const ClassifierParams& params,
                                                  const Eigen::MatrixXd& x,
                                                  int target_class,
                                                  OutputKind kind) {
  if (auto status = CheckInput(params, x); !status.ok()) return status;
  if (target_class < 0 || target_class >= params.num_classes()) {
    return absl::InvalidArgumentError(
        absl::StrCat("target class ", target_class, " out of range"));
  }
  const Activations act = Run(params, x);
  Eigen::VectorXd grad_logits = Eigen::VectorXd::Zero(params.num_classes());
  if (kind == OutputKind::kLogit) {
    grad_logits(target_class) = 1.0;
  } else {
    // d p_c / d z = p_c (e_c - p)
    const Eigen::VectorXd p = Softmax(act.logits);
    grad_logits = -p(target_class) * p;
    grad_logits(target_class) += p(target_class);
  }
  const Eigen::VectorXd grad_pooled = PooledGradient(params, act, grad_logits);
  // Mean pooling spreads the pooled gradient evenly over the tokens.
  return Eigen::MatrixXd(
      (grad_pooled.transpose() / static_cast<double>(x.rows()))
          .replicate(x.rows(), 1));
}

absl::Status TrainConfig::Validate() const {
  if (!(learning_rate > 0) || !(adam_epsilon > 0) || !(grad_clip_norm > 0) ||
      !(init_range > 0)) {
    return absl::InvalidArgumentError(
        "learning_rate, adam_epsilon, grad_clip_norm and init_range must be "
        "positive");
  }
  if (!(adam_beta1 > 0 && adam_beta1 < 1) || !(adam_beta2 > 0 && adam_beta2 < 1)) {
    return absl::InvalidArgumentError("Adam betas must lie in (0, 1)");
  }
  if (batch_size < 1 || embedding_dim < 1 || hidden_dim < 1) {
    return absl::InvalidArgumentError(
        "batch_size, embedding_dim and hidden_dim must be positive");
  }
  if (epochs < 1) return absl::InvalidArgumentError("epochs must be >= 1");
  return absl::OkStatus();
}

json TrainConfig::ToJson() const {
  return {{"learning_rate", learning_rate}, {"adam_epsilon", adam_epsilon},
          {"adam_beta1", adam_beta1},       {"adam_beta2", adam_beta2},
          {"batch_size", batch_size},       {"epochs", epochs},
          {"grad_clip_norm", grad_clip_norm}, {"seed", seed},
          {"embedding_dim", embedding_dim}, {"hidden_dim", hidden_dim},
          {"init_range", init_range}};
}

absl::StatusOr<TrainConfig> TrainConfig::FromJson(const json& value) {
  if (!value.is_object()) {
    return absl::InvalidArgumentError("train config must be a JSON object");
  }
  TrainConfig c;
  try {
    c.learning_rate = value.value("learning_rate", c.learning_rate);
    c.adam_epsilon = value.value("adam_epsilon", c.adam_epsilon);
    c.adam_beta1 = value.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = value.value("adam_beta2", c.adam_beta2);
    c.batch_size = value.value("batch_size", c.batch_size);
    c.epochs = value.value("epochs", c.epochs);
    c.grad_clip_norm = value.value("grad_clip_norm", c.grad_clip_norm);
    c.seed = value.value("seed", c.seed);
    c.embedding_dim = value.value("embedding_dim", c.embedding_dim);
    c.hidden_dim = value.value("hidden_dim", c.hidden_dim);
    c.init_range = value.value("init_range", c.init_range);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed train config: ", e.what()));
  }
  if (auto status = c.Validate(); !status.ok()) return status;
  return c;
}

double ClipGlobalNorm(ClassifierParams& grads, double max_norm) {
  const double norm = std::sqrt(grads.SquaredNorm());
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    grads.embeddings *= scale;
    grads.hidden_weights *= scale;
    grads.hidden_bias *= scale;
    grads.output_weights *= scale;
    grads.output_bias *= scale;
  }
  return norm;
}

absl::StatusOr<MlpClassifier> MlpClassifier::Create(
    std::vector<std::string> vocabulary, std::vector<std::string> labels,
    ClassifierParams params, TrainConfig config) {
  if (vocabulary.empty() || vocabulary[0] != kUnknownToken) {
    return absl::InvalidArgumentError("vocabulary must start with <unk>");
  }
  if (static_cast<int>(vocabulary.size()) != params.vocab_size()) {
    return absl::InvalidArgumentError("vocabulary size mismatch");
  }
  if (static_cast<int>(labels.size()) != params.num_classes()) {
    return absl::InvalidArgumentError("label count mismatch");
  }
  if (auto status = params.Validate(); !status.ok()) return status;
  MlpClassifier model;
  for (size_t i = 0; i < vocabulary.size(); ++i) {
    if (!model.token_ids_.emplace(vocabulary[i], static_cast<int>(i)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate vocabulary token `", vocabulary[i], "`"));
    }
  }
  model.vocabulary_ = std::move(vocabulary);
  model.labels_ = std::move(labels);
  model.params_ = std::move(params);
  model.config_ = config;
  return model;
}

absl::StatusOr<Eigen::VectorXd> MlpClassifier::Outputs(
    const Eigen::MatrixXd& x, OutputKind kind) const {
  return kind == OutputKind::kProbability
             ? shortcut_audit::Forward(params_, x)
             : shortcut_audit::Logits(params_, x);
}

absl::StatusOr<Eigen::MatrixXd> MlpClassifier::GradWrtEmbeddings(
    const Eigen::MatrixXd& x, int target_class, OutputKind kind) const {
  return shortcut_audit::GradWrtEmbeddings(params_, x, target_class, kind);
}

std::vector<int> MlpClassifier::TokenIds(
    const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& token : tokens) {
    auto it = token_ids_.find(token);
    ids.push_back(it == token_ids_.end() ? 0 : it->second);
  }
  return ids;
}

Eigen::MatrixXd MlpClassifier::Embed(const std::vector<std::string>& tokens) const {
  const std::vector<int> ids = TokenIds(tokens);
  Eigen::MatrixXd x(ids.size(), params_.dim());
  for (size_t t = 0; t < ids.size(); ++t) x.row(t) = params_.embeddings.row(ids[t]);
  return x;
}

int MlpClassifier::LabelIndex(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

json MlpClassifier::ToJson() const {
  return {{"format", "shortcut-audit-mlp"},
          {"version", kCheckpointVersion},
          {"vocab_size", params_.vocab_size()},
          {"dim", params_.dim()},
          {"hidden", params_.hidden()},
          {"num_classes", params_.num_classes()},
          {"seed", config_.seed},
          {"config", config_.ToJson()},
          {"labels", labels_},
          {"vocabulary", vocabulary_},
          {"embeddings", MatrixToJson(params_.embeddings)},
          {"hidden_weights", MatrixToJson(params_.hidden_weights)},
          {"hidden_bias", VectorToJson(params_.hidden_bias)},
          {"output_weights", MatrixToJson(params_.output_weights)},
          {"output_bias", VectorToJson(params_.output_bias)}};
}

absl::StatusOr<MlpClassifier> MlpClassifier::FromJson(const json& value) {
  try {
    if (value.at("format").get<std::string>() != "shortcut-audit-mlp") {
      return absl::InvalidArgumentError("not a shortcut-audit checkpoint");
    }
    if (value.at("version").get<int>() != kCheckpointVersion) {
      return absl::InvalidArgumentError("unsupported checkpoint version");
    }
    const int vocab_size = value.at("vocab_size").get<int>();
    const int dim = value.at("dim").get<int>();
    const int hidden = value.at("hidden").get<int>();
    const int num_classes = value.at("num_classes").get<int>();
    ClassifierParams params;
    params.embeddings = MatrixFromJson(value.at("embeddings"), vocab_size, dim);
    params.hidden_weights = MatrixFromJson(value.at("hidden_weights"), dim, hidden);
    params.hidden_bias = VectorFromJson(value.at("hidden_bias"), hidden);
    params.output_weights =
        MatrixFromJson(value.at("output_weights"), hidden, num_classes);
    params.output_bias = VectorFromJson(value.at("output_bias"), num_classes);
    auto config = TrainConfig::FromJson(value.at("config"));
    if (!config.ok()) return config.status();
    return Create(value.at("vocabulary").get<std::vector<std::string>>(),
                  value.at("labels").get<std::vector<std::string>>(),
                  std::move(params), *config);
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed checkpoint: ", e.what()));
  }
}

absl::Status MlpClassifier::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << ToJson().dump(-1, ' ', false, json::error_handler_t::replace) << "\n";
  return out ? absl::OkStatus()
             : absl::UnavailableError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<MlpClassifier> MlpClassifier::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  json value = json::parse(buffer.str(), nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": invalid JSON"));
  }
  return FromJson(value);
}

double MeanCrossEntropy(const MlpClassifier& model, const Corpus& corpus) {
  double total = 0.0;
  for (const Sample& sample : corpus.samples()) {
    const int label = model.LabelIndex(sample.label);
    const Eigen::VectorXd p =
        Softmax(Run(model.params(), model.Embed(sample.tokens)).logits);
    total += -std::log(std::max(label < 0 ? 0.0 : p(label), 1e-300));
  }
  return total / static_cast<double>(corpus.size());
}

absl::StatusOr<TrainResult> Train(const Corpus& corpus,
                                  const TrainConfig& config) {
  if (auto status = config.Validate(); !status.ok()) return status;
  if (corpus.labels().size() < 2) {
    return absl::InvalidArgumentError(
        "training requires at least two classes");
  }

  std::vector<std::string> vocabulary = {std::string(MlpClassifier::kUnknownToken)};
  for (const auto& [token, count] : corpus.vocab()) {
    if (token != MlpClassifier::kUnknownToken) vocabulary.push_back(token);
  }
  const int num_classes = static_cast<int>(corpus.labels().size());
  ClassifierParams params =
      ClassifierParams::Zeros(static_cast<int>(vocabulary.size()),
                              config.embedding_dim, config.hidden_dim,
                              num_classes);
  Rng rng(config.seed);
  FillUniform(params.embeddings, config.init_range, rng);
  FillUniform(params.hidden_weights, config.init_range, rng);
  FillUniform(params.hidden_bias, config.init_range, rng);
  FillUniform(params.output_weights, config.init_range, rng);
  FillUniform(params.output_bias, config.init_range, rng);

  auto model = MlpClassifier::Create(vocabulary, corpus.labels(), params, config);
  if (!model.ok()) return model.status();

  struct Encoded {
    std::vector<int> ids;
    int label;
  };
  std::vector<Encoded> data;
  data.reserve(corpus.size());
  for (const Sample& sample : corpus.samples()) {
    data.push_back({model->TokenIds(sample.tokens), model->LabelIndex(sample.label)});
  }

  TrainResult result{*std::move(model), {}};
  result.loss_trace.push_back(MeanCrossEntropy(result.model, corpus));

  AdamState adam{ClassifierParams::Zeros(params.vocab_size(), params.dim(),
                                         params.hidden(), num_classes),
                 ClassifierParams::Zeros(params.vocab_size(), params.dim(),
                                         params.hidden(), num_classes),
                 0};
  ClassifierParams grads = adam.m;
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.Shuffle(order);
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      grads.embeddings.setZero();
      grads.hidden_weights.setZero();
      grads.hidden_bias.setZero();
      grads.output_weights.setZero();
      grads.output_bias.setZero();
      for (size_t i = start; i < end; ++i) {
        const Encoded& e = data[order[i]];
        AccumulateSampleGradient(params, e.ids, e.label, grads);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      grads.embeddings *= scale;
      grads.hidden_weights *= scale;
      grads.hidden_bias *= scale;
      grads.output_weights *= scale;
      grads.output_bias *= scale;
      ClipGlobalNorm(grads, config.grad_clip_norm);
      AdamStep(params, grads, adam, config);
    }
    if (!params.AllFinite()) {
      return absl::InternalError(
          absl::StrCat("training diverged in epoch ", epoch + 1));
    }
    auto updated = MlpClassifier::Create(vocabulary, corpus.labels(), params, config);
    if (!updated.ok()) return updated.status();
    result.model = *std::move(updated);
    result.loss_trace.push_back(MeanCrossEntropy(result.model, corpus));
  }
  return result;
}

}  // namespace shortcut_audit
