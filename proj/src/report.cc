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

#include "shortcut_audit/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"

namespace shortcut_audit {
namespace {

using json = nlohmann::json;

json OptionalToJson(const std::optional<double>& value) {
  return value.has_value() ? json(*value) : json(nullptr);
}

std::optional<double> OptionalFromJson(const json& value) {
  if (value.is_null()) return std::nullopt;
  return value.get<double>();
}

json SummaryToJson(const TradeoffSummary& s) {
  return {{"f1", s.f1_percent},
          {"p_sc", s.p_sc_percent},
          {"t_sc", OptionalToJson(s.t_sc)},
          {"ece", s.ece}};
}

TradeoffSummary SummaryFromJson(const json& value) {
  TradeoffSummary s;
  s.f1_percent = value.at("f1").get<double>();
  s.p_sc_percent = value.at("p_sc").get<double>();
  s.t_sc = OptionalFromJson(value.at("t_sc"));
  s.ece = value.at("ece").get<double>();
  return s;
}

json CuesToJson(const CueCounts& c) {
  return {{"lexicon", c.lexicon},
          {"grammar", c.grammar},
          {"non_shortcut", c.non_shortcut}};
}

CueCounts CuesFromJson(const json& value) {
  CueCounts c;
  c.lexicon = value.at("lexicon").get<int64_t>();
  c.grammar = value.at("grammar").get<int64_t>();
  c.non_shortcut = value.at("non_shortcut").get<int64_t>();
  return c;
}

json BinToJson(const BinStats& bin) {
  return {{"index", bin.index},
          {"low", bin.low},
          {"high", bin.high},
          {"count", bin.count},
          {"accuracy", bin.accuracy},
          {"mean_confidence", bin.mean_confidence},
          {"cues", CuesToJson(bin.cues)}};
}

BinStats BinFromJson(const json& value) {
  BinStats bin;
  bin.index = value.at("index").get<int>();
  bin.low = value.at("low").get<double>();
  bin.high = value.at("high").get<double>();
  bin.count = value.at("count").get<int64_t>();
  bin.accuracy = value.at("accuracy").get<double>();
  bin.mean_confidence = value.at("mean_confidence").get<double>();
  bin.cues = CuesFromJson(value.at("cues"));
  return bin;
}

json TopTokensToJson(const std::vector<AttributedToken>& tokens) {
  json out = json::array();
  for (const AttributedToken& t : tokens) {
    out.push_back(
        {{"token", t.token}, {"score", t.importance}, {"position", t.position}});
  }
  return out;
}

absl::StatusOr<std::vector<AttributedToken>> TopTokensFromJson(
    const json& value) {
  if (!value.is_array()) {
    return absl::InvalidArgumentError("`top_tokens` must be an array");
  }
  std::vector<AttributedToken> tokens;
  for (size_t i = 0; i < value.size(); ++i) {
    const json& item = value[i];
    AttributedToken t;
    if (item.is_string()) {
      t.token = item.get<std::string>();
    } else if (item.is_object() && item.contains("token") &&
               item["token"].is_string()) {
      t.token = item["token"].get<std::string>();
      if (auto it = item.find("score"); it != item.end()) {
        if (!it->is_number()) {
          return absl::InvalidArgumentError("`score` must be a number");
        }
        t.importance = it->get<double>();
      }
      t.position = item.value("position", static_cast<int>(i));
    } else {
      return absl::InvalidArgumentError(
          "`top_tokens` entries must be strings or {token, score} objects");
    }
    if (!item.is_object()) t.position = static_cast<int>(i);
    tokens.push_back(std::move(t));
  }
  return tokens;
}

PredictionRecord RecordFromJson(const json& value) {
  PredictionRecord r;
  r.sample_id = value.at("id").get<std::string>();
  r.true_label = value.at("true_label").get<std::string>();
  r.predicted_label = value.at("predicted_label").get<std::string>();
  r.class_labels = value.at("labels").get<std::vector<std::string>>();
  r.probs = value.at("probs").get<std::vector<double>>();
  r.confidence = value.at("confidence").get<double>();
  r.correct = value.at("correct").get<bool>();
  auto top = TopTokensFromJson(value.at("top_tokens"));
  if (!top.ok()) throw std::invalid_argument(std::string(top.status().message()));
  r.top_tokens = *std::move(top);
  if (value.contains("shortcut")) {
    ShortcutVerdict v;
    v.is_shortcut = value.at("shortcut").get<bool>();
    auto cue = ParseCueType(value.at("cue_type").get<std::string>());
    auto mode = ParseMatchMode(value.at("match_mode").get<std::string>());
    if (!cue.ok() || !mode.ok()) throw std::invalid_argument("bad verdict");
    v.cue_type = *cue;
    v.match_mode = *mode;
    for (const json& t : value.at("matched_tokens")) {
      v.matched_tokens.insert(t.get<std::string>());
    }
    r.verdict = std::move(v);
  }
  return r;
}

std::string DumpLine(const json& value) {
  return value.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string FormatNumber(double value) { return absl::StrFormat("%.4f", value); }

}  // namespace

json AuditConfig::ToJson() const {
  return {{"bins", bins},
          {"top_k", top_k},
          {"head_fraction", head_fraction},
          {"match_mode", MatchModeName(match_mode)},
          {"ig_steps", ig_steps},
          {"seed", seed},
          {"normalizer", LmiNormalizerName(normalizer)},
          {"output_kind", OutputKindName(output_kind)},
          {"averaging", F1AveragingName(averaging)},
          {"stopwords", stopwords}};
}

absl::StatusOr<AuditConfig> AuditConfig::FromJson(const json& value) {
  try {
    AuditConfig c;
    c.bins = value.at("bins").get<int>();
    c.top_k = value.at("top_k").get<int>();
    c.head_fraction = value.at("head_fraction").get<double>();
    c.ig_steps = value.at("ig_steps").get<int>();
    c.seed = value.at("seed").get<uint64_t>();
    c.stopwords = value.at("stopwords").get<std::string>();
    auto mode = ParseMatchMode(value.at("match_mode").get<std::string>());
    if (!mode.ok()) return mode.status();
    c.match_mode = *mode;
    auto normalizer = ParseLmiNormalizer(value.at("normalizer").get<std::string>());
    if (!normalizer.ok()) return normalizer.status();
    c.normalizer = *normalizer;
    auto kind = ParseOutputKind(value.at("output_kind").get<std::string>());
    if (!kind.ok()) return kind.status();
    c.output_kind = *kind;
    auto averaging = ParseF1Averaging(value.at("averaging").get<std::string>());
    if (!averaging.ok()) return averaging.status();
    c.averaging = *averaging;
    return c;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed audit config: ", e.what()));
  }
}

json RecordToJson(const PredictionRecord& r) {
  json out = {{"id", r.sample_id},
              {"true_label", r.true_label},
              {"predicted_label", r.predicted_label},
              {"labels", r.class_labels},
              {"probs", r.probs},
              {"confidence", r.confidence},
              {"correct", r.correct},
              {"top_tokens", TopTokensToJson(r.top_tokens)}};
  if (r.verdict.has_value()) {
    out["shortcut"] = r.verdict->is_shortcut;
    out["cue_type"] = CueTypeName(r.verdict->cue_type);
    out["matched_tokens"] = r.verdict->matched_tokens;
    out["match_mode"] = MatchModeName(r.verdict->match_mode);
  }
  return out;
}

json AuditReport::ToJson() const {
  json bin_rows = json::array();
  for (const BinStats& bin : bins) bin_rows.push_back(BinToJson(bin));
  json record_rows = json::array();
  for (const PredictionRecord& r : records) record_rows.push_back(RecordToJson(r));
  return {{"dataset", dataset},
          {"model", model},
          {"n", n},
          {"summary", SummaryToJson(summary)},
          {"bins", std::move(bin_rows)},
          {"cue_totals", CuesToJson(cue_totals)},
          {"config", config.ToJson()},
          {"tool_version", tool_version},
          {"records", std::move(record_rows)}};
}

absl::StatusOr<AuditReport> AuditReport::FromJson(const json& value) {
  try {
    AuditReport report;
    report.dataset = value.at("dataset").get<std::string>();
    report.model = value.at("model").get<std::string>();
    report.n = value.at("n").get<int64_t>();
    report.summary = SummaryFromJson(value.at("summary"));
    for (const json& bin : value.at("bins")) {
      report.bins.push_back(BinFromJson(bin));
    }
    report.cue_totals = CuesFromJson(value.at("cue_totals"));
    auto config = AuditConfig::FromJson(value.at("config"));
    if (!config.ok()) return config.status();
    report.config = *config;
    report.tool_version = value.at("tool_version").get<std::string>();
    for (const json& r : value.at("records")) {
      report.records.push_back(RecordFromJson(r));
    }
    return report;
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed audit report: ", e.what()));
  }
}

std::string AuditReport::Serialize() const {
  return ToJson().dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

absl::StatusOr<AuditReport> AuditReport::Parse(absl::string_view text) {
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) {
    return absl::InvalidArgumentError("audit report is not valid JSON");
  }
  return FromJson(value);
}

absl::StatusOr<AuditReport> Assemble(std::vector<PredictionRecord> records,
                                     const AuditConfig& config,
                                     std::string dataset, std::string model) {
  if (records.empty()) return absl::InvalidArgumentError("no records");
  for (const PredictionRecord& r : records) {
    if (!r.verdict.has_value()) {
      return absl::FailedPreconditionError("verdicts required");
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const PredictionRecord& a, const PredictionRecord& b) {
                     return a.sample_id < b.sample_id;
                   });
  AuditReport report;
  auto summary = Summarize(records, config.bins, config.averaging);
  if (!summary.ok()) return summary.status();
  auto bins = Bin(records, config.bins);
  if (!bins.ok()) return bins.status();
  report.dataset = std::move(dataset);
  report.model = std::move(model);
  report.n = static_cast<int64_t>(records.size());
  report.summary = *summary;
  report.bins = *std::move(bins);
  report.cue_totals = CountCues(records);
  report.config = config;
  report.records = std::move(records);
  return report;
}

json ReportDelta::ToJson() const {
  json rows = json::array();
  for (const BinDelta& b : bins) {
    rows.push_back({{"index", b.index},
                    {"count", b.count},
                    {"accuracy", b.accuracy},
                    {"mean_confidence", b.mean_confidence},
                    {"lexicon", b.lexicon},
                    {"grammar", b.grammar},
                    {"non_shortcut", b.non_shortcut}});
  }
  return {{"dataset", dataset},
          {"ece", ece},
          {"p_sc", p_sc},
          {"f1", f1},
          {"t_sc", OptionalToJson(t_sc)},
          {"bins", std::move(rows)}};
}

absl::StatusOr<ReportDelta> Diff(const AuditReport& before,
                                 const AuditReport& after) {
  if (before.dataset != after.dataset) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dataset mismatch: `", before.dataset, "` vs `", after.dataset, "`"));
  }
  if (before.config.bins != after.config.bins ||
      before.bins.size() != after.bins.size()) {
    return absl::InvalidArgumentError("bin count mismatch");
  }
  ReportDelta delta;
  delta.dataset = after.dataset;
  delta.ece = after.summary.ece - before.summary.ece;
  delta.p_sc = after.summary.p_sc_percent - before.summary.p_sc_percent;
  delta.f1 = after.summary.f1_percent - before.summary.f1_percent;
  if (before.summary.t_sc.has_value() && after.summary.t_sc.has_value()) {
    delta.t_sc = *after.summary.t_sc - *before.summary.t_sc;
  }
  for (size_t m = 0; m < after.bins.size(); ++m) {
    const BinStats& a = after.bins[m];
    const BinStats& b = before.bins[m];
    delta.bins.push_back({a.index, a.count - b.count, a.accuracy - b.accuracy,
                          a.mean_confidence - b.mean_confidence,
                          a.cues.lexicon - b.cues.lexicon,
                          a.cues.grammar - b.cues.grammar,
                          a.cues.non_shortcut - b.cues.non_shortcut});
  }
  return delta;
}

absl::StatusOr<TradeoffSummary> MeanSummary(
    const std::vector<AuditReport>& reports) {
  if (reports.empty()) return absl::InvalidArgumentError("no reports");
  TradeoffSummary mean;
  double t_sc_sum = 0.0;
  int t_sc_count = 0;
  for (const AuditReport& r : reports) {
    mean.f1_percent += r.summary.f1_percent;
    mean.p_sc_percent += r.summary.p_sc_percent;
    mean.ece += r.summary.ece;
    if (r.summary.t_sc.has_value()) {
      t_sc_sum += *r.summary.t_sc;
      ++t_sc_count;
    }
  }
  const auto n = static_cast<double>(reports.size());
  mean.f1_percent /= n;
  mean.p_sc_percent /= n;
  mean.ece /= n;
  if (t_sc_count > 0) mean.t_sc = t_sc_sum / t_sc_count;
  return mean;
}

std::string SummaryCsv(const std::vector<AuditReport>& reports) {
  std::string out = "model,dataset,P_sc,T_sc,ECE,F1\n";
  for (const AuditReport& r : reports) {
    absl::StrAppend(&out, r.model, ",", r.dataset, ",",
                    FormatNumber(r.summary.p_sc_percent), ",",
                    r.summary.t_sc.has_value() ? FormatNumber(*r.summary.t_sc)
                                               : std::string("n/a"),
                    ",", FormatNumber(r.summary.ece), ",",
                    FormatNumber(r.summary.f1_percent), "\n");
  }
  return out;
}

std::string ExportAttributionsJsonl(const std::vector<PredictionRecord>& records,
                                    int steps) {
  std::string out;
  for (const PredictionRecord& r : records) {
    json line = {{"id", r.sample_id},
                 {"true_label", r.true_label},
                 {"predicted_label", r.predicted_label},
                 {"labels", r.class_labels},
                 {"probs", r.probs},
                 {"top_tokens", TopTokensToJson(r.top_tokens)},
                 {"steps_m", steps}};
    absl::StrAppend(&out, DumpLine(line), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<PredictionRecord>> ParseExternalPredictions(
    absl::string_view content) {
  std::vector<PredictionRecord> records;
  int64_t line_number = 0;
  for (absl::string_view line : absl::StrSplit(content, '\n')) {
    ++line_number;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    auto fail = [&](absl::string_view message) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": ", message));
    };
    json value = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded() || !value.is_object()) {
      return fail("malformed JSON record");
    }
    for (const char* key : {"id", "probs", "true_label", "top_tokens"}) {
      if (!value.contains(key)) {
        return fail(absl::StrCat("missing field `", key, "`"));
      }
    }
    const json& id = value["id"];
    const json& true_label = value["true_label"];
    if (!(id.is_string() || id.is_number_integer()) ||
        !(true_label.is_string() || true_label.is_number_integer())) {
      return fail("`id` and `true_label` must be strings");
    }
    std::vector<std::string> labels;
    std::vector<double> probs;
    const json& p = value["probs"];
    if (p.is_object()) {
      for (const auto& [label, prob] : p.items()) {
        if (!prob.is_number()) return fail("`probs` values must be numbers");
        labels.push_back(label);
        probs.push_back(prob.get<double>());
      }
    } else if (p.is_array()) {
      for (const json& prob : p) {
        if (!prob.is_number()) return fail("`probs` values must be numbers");
        probs.push_back(prob.get<double>());
      }
      if (auto it = value.find("labels"); it != value.end() && !it->empty()) {
        if (!it->is_array() || it->size() != probs.size()) {
          return fail("`labels` must match `probs` in length");
        }
        for (const json& label : *it) {
          if (!label.is_string()) return fail("`labels` must be strings");
          labels.push_back(label.get<std::string>());
        }
      } else {
        for (size_t c = 0; c < probs.size(); ++c) labels.push_back(absl::StrCat(c));
      }
    } else {
      return fail("`probs` must be an array or an object");
    }
    if (probs.empty()) return fail("`probs` is empty");

    std::string predicted;
    if (auto it = value.find("predicted_label"); it != value.end() && !it->is_null()) {
      if (!it->is_string() && !it->is_number_integer()) {
        return fail("`predicted_label` must be a string");
      }
      predicted = it->is_string() ? it->get<std::string>() : it->dump();
    } else {
      predicted = labels[std::max_element(probs.begin(), probs.end()) - probs.begin()];
    }
    auto record = MakeRecord(id.is_string() ? id.get<std::string>() : id.dump(),
                             true_label.is_string() ? true_label.get<std::string>()
                                                    : true_label.dump(),
                             std::move(predicted), std::move(probs),
                             /*sum_tolerance=*/1e-3);
    if (!record.ok()) return fail(record.status().message());
    auto top = TopTokensFromJson(value["top_tokens"]);
    if (!top.ok()) return fail(top.status().message());
    if (top->empty()) return fail("`top_tokens` is empty");
    record->top_tokens = *std::move(top);
    record->class_labels = std::move(labels);
    records.push_back(*std::move(record));
  }
  if (records.empty()) return absl::InvalidArgumentError("no predictions");
  return records;
}

absl::StatusOr<std::vector<PredictionRecord>> ImportExternal(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto records = ParseExternalPredictions(buffer.str());
  if (!records.ok()) {
    return absl::Status(records.status().code(),
                        absl::StrCat(path, ": ", records.status().message()));
  }
  return records;
}

absl::StatusOr<std::vector<PredictionRecord>> PredictAndAttribute(
    const MlpClassifier& model, const std::vector<Sample>& samples,
    const AttributionOptions& options, int jobs) {
  auto results = AttributeAll(model, samples, options, jobs);
  if (!results.ok()) return results.status();
  std::vector<PredictionRecord> records;
  records.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    AttributionResult& a = (*results)[i];
    std::vector<double> probs(a.probs.data(), a.probs.data() + a.probs.size());
    auto record = MakeRecord(samples[i].id, samples[i].label,
                             model.labels()[a.predicted_class], std::move(probs));
    if (!record.ok()) return record.status();
    record->class_labels = model.labels();
    record->top_tokens = std::move(a.top_tokens);
    records.push_back(*std::move(record));
  }
  return records;
}

absl::Status AttachVerdicts(std::vector<PredictionRecord>& records,
                            const LmiTable& table, MatchMode mode,
                            const CueLexicon& cues) {
  for (PredictionRecord& r : records) {
    auto head = table.Head(r.predicted_label);
    if (!head.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("record `", r.sample_id, "`: predicted label `",
                       r.predicted_label, "` has no LMI head"));
    }
    std::vector<std::string> top;
    top.reserve(r.top_tokens.size());
    for (const AttributedToken& t : r.top_tokens) top.push_back(t.token);
    auto verdict = Detect(top, **head, mode, cues);
    if (!verdict.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "record `", r.sample_id, "`: ", verdict.status().message()));
    }
    r.verdict = *std::move(verdict);
  }
  return absl::OkStatus();
}

}  // namespace shortcut_audit
