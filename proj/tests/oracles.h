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

// Independent reference computations used only by tests. Each one follows
// the defining formula directly, without sharing code paths with the
// library implementation it checks.

#ifndef SHORTCUT_AUDIT_TESTS_ORACLES_H_
#define SHORTCUT_AUDIT_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Core"
#include "shortcut_audit/calibration.h"
#include "shortcut_audit/corpus.h"
#include "shortcut_audit/model.h"

namespace shortcut_audit::oracle {

struct LmiValue {
  double lmi = 0.0;
  long count = 0;
};

// LMI(w, y) = p(w,y) * log(p(y|w) / p(y)) with counts taken straight from the
// raw samples. `use_distinct_vocab` selects |V| instead of the token total
// as the denominator of p(w,y) and p(y).
inline std::map<std::pair<std::string, std::string>, LmiValue> BruteForceLmi(
    const std::vector<Sample>& samples, bool use_distinct_vocab = false) {
  std::map<std::pair<std::string, std::string>, long> joint;
  std::map<std::string, long> token_count;
  std::map<std::string, long> label_count;
  long total = 0;
  for (const Sample& s : samples) {
    for (const std::string& t : s.tokens) {
      joint[{t, s.label}] += 1;
      token_count[t] += 1;
      label_count[s.label] += 1;
      total += 1;
    }
  }
  const double n = use_distinct_vocab ? static_cast<double>(token_count.size())
                                      : static_cast<double>(total);
  std::map<std::pair<std::string, std::string>, LmiValue> out;
  for (const auto& [key, c] : joint) {
    const double p_wy = c / n;
    const double p_y_given_w = static_cast<double>(c) / token_count[key.first];
    const double p_y = label_count[key.second] / n;
    out[key] = {p_wy * std::log(p_y_given_w / p_y), c};
  }
  return out;
}

// Sorts a label's tokens by (lmi desc, count desc, token asc), slices
// ceil(fraction * K) and extends the slice over (lmi, count) ties. LMI values
// within kTieTolerance are treated as equal so that ties the formula makes
// exact are recognized even when floating-point rounding splits them.
inline constexpr double kTieTolerance = 1e-13;

inline std::set<std::string> SortAndSliceHead(
    const std::vector<std::pair<std::string, LmiValue>>& scored,
    double fraction) {
  auto rows = scored;
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.second.lmi > b.second.lmi; });
  // Snap near-equal neighbours onto a shared value, then apply the
  // secondary keys.
  for (size_t i = 1; i < rows.size(); ++i) {
    if (std::abs(rows[i].second.lmi - rows[i - 1].second.lmi) <= kTieTolerance) {
      rows[i].second.lmi = rows[i - 1].second.lmi;
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second.lmi != b.second.lmi) return a.second.lmi > b.second.lmi;
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.first < b.first;
  });
  size_t k = 0;
  while (k < rows.size() && static_cast<double>(k) < fraction * rows.size() - 1e-9) {
    ++k;
  }
  k = std::max<size_t>(k, 1);
  std::set<std::string> head;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (i < k || (rows[i].second.lmi == rows[k - 1].second.lmi &&
                  rows[i].second.count == rows[k - 1].second.count)) {
      head.insert(rows[i].first);
    }
  }
  return head;
}

// ECE by scanning every bin interval and every record for each bin.
inline double BruteForceEce(const std::vector<PredictionRecord>& records,
                            int num_bins) {
  double ece = 0.0;
  for (int m = 1; m <= num_bins; ++m) {
    const double low = static_cast<double>(m - 1) / num_bins;
    const double high = static_cast<double>(m) / num_bins;
    long count = 0;
    long correct = 0;
    std::vector<double> conf;
    for (const PredictionRecord& r : records) {
      const bool in_bin =
          (r.confidence > low && r.confidence <= high) ||
          (m == 1 && r.confidence == 0.0);
      if (!in_bin) continue;
      ++count;
      if (r.predicted_label == r.true_label) ++correct;
      conf.push_back(r.confidence);
    }
    if (count == 0) continue;
    std::sort(conf.begin(), conf.end());
    double conf_sum = 0.0;
    for (double c : conf) conf_sum += c;
    const double acc = static_cast<double>(correct) / count;
    ece += (static_cast<double>(count) / records.size()) *
           std::abs(acc - conf_sum / count);
  }
  return ece;
}

// Straight loop-based forward pass of the mean-pool MLP.
inline std::vector<double> LoopLogits(const ClassifierParams& p,
                                      const Eigen::MatrixXd& x) {
  const long T = x.rows(), d = x.cols(), h = p.hidden_weights.cols(),
             C = p.output_weights.cols();
  std::vector<double> pooled(d, 0.0);
  for (long j = 0; j < d; ++j) {
    for (long t = 0; t < T; ++t) pooled[j] += x(t, j);
    pooled[j] /= T;
  }
  std::vector<double> hidden(h);
  for (long k = 0; k < h; ++k) {
    double a = p.hidden_bias(k);
    for (long j = 0; j < d; ++j) a += pooled[j] * p.hidden_weights(j, k);
    hidden[k] = a > 0 ? a : 0.0;
  }
  std::vector<double> logits(C);
  for (long c = 0; c < C; ++c) {
    double z = p.output_bias(c);
    for (long k = 0; k < h; ++k) z += hidden[k] * p.output_weights(k, c);
    logits[c] = z;
  }
  return logits;
}

inline std::vector<double> LoopProbabilities(const ClassifierParams& p,
                                             const Eigen::MatrixXd& x) {
  std::vector<double> z = LoopLogits(p, x);
  double max_z = z[0];
  for (double v : z) max_z = std::max(max_z, v);
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - max_z);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

inline double LoopOutput(const ClassifierParams& p, const Eigen::MatrixXd& x,
                         int target, OutputKind kind) {
  return kind == OutputKind::kLogit ? LoopLogits(p, x)[target]
                                    : LoopProbabilities(p, x)[target];
}

// Central finite differences of one output with respect to each input entry.
inline Eigen::MatrixXd FiniteDifferenceGradient(const ClassifierParams& p,
                                                const Eigen::MatrixXd& x,
                                                int target, OutputKind kind,
                                                double step = 1e-5) {
  Eigen::MatrixXd grad(x.rows(), x.cols());
  Eigen::MatrixXd probe = x;
  for (long t = 0; t < x.rows(); ++t) {
    for (long j = 0; j < x.cols(); ++j) {
      probe(t, j) = x(t, j) + step;
      const double up = LoopOutput(p, probe, target, kind);
      probe(t, j) = x(t, j) - step;
      const double down = LoopOutput(p, probe, target, kind);
      probe(t, j) = x(t, j);
      grad(t, j) = (up - down) / (2 * step);
    }
  }
  return grad;
}

// Smallest |pre-activation| of the hidden layer; finite differences are only
// meaningful away from the ReLU kink.
inline double MinHiddenMargin(const ClassifierParams& p, const Eigen::MatrixXd& x) {
  const Eigen::VectorXd pooled = x.colwise().mean().transpose();
  const Eigen::VectorXd a = p.hidden_weights.transpose() * pooled + p.hidden_bias;
  return a.cwiseAbs().minCoeff();
}

}  // namespace shortcut_audit::oracle

#endif  // SHORTCUT_AUDIT_TESTS_ORACLES_H_
