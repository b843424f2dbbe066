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

#include "shortcut_audit/cli.h"

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"
#include "json.hpp"
#include "shortcut_audit/calibration.h"
#include "shortcut_audit/synth.h"

namespace shortcut_audit {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Reads `--config` files as JSON. Flat keys are routed to the active
// subcommand; nested objects name a subcommand explicitly. Underscores in
// keys are accepted in place of dashes.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string section) : section_(std::move(section)) {}

  std::string to_config(const CLI::App*, bool, bool,
                        std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json value = json::parse(input, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded() || !value.is_object()) {
      throw CLI::ConfigError("config file must hold a JSON object",
                             CLI::ExitCodes::ConfigError);
    }
    std::vector<CLI::ConfigItem> items;
    std::vector<std::string> parents;
    if (!section_.empty()) parents.push_back(section_);
    Collect(value, parents, items);
    return items;
  }

 private:
  static void Collect(const json& object, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : object.items()) {
      const std::string name = absl::StrReplaceAll(key, {{"_", "-"}});
      if (value.is_object()) {
        Collect(value, {name}, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = name;
      if (value.is_array()) {
        for (const json& v : value) item.inputs.push_back(Scalar(v));
      } else {
        item.inputs.push_back(Scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  static std::string Scalar(const json& value) {
    return value.is_string() ? value.get<std::string>() : value.dump();
  }

  std::string section_;
};

// A failure in the data rather than in the invocation.
struct DataError {
  absl::Status status;
};

template <typename T>
T OrDataError(absl::StatusOr<T> value) {
  if (!value.ok()) throw DataError{value.status()};
  return *std::move(value);
}

void OrDataError(const absl::Status& status) {
  if (!status.ok()) throw DataError{status};
}

absl::Status WriteFile(const fs::path& path, absl::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path.string()));
  out << content;
  return out ? absl::OkStatus()
             : absl::UnavailableError(absl::StrCat("write failed: ", path.string()));
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::StatusOr<json> ReadJson(const std::string& path) {
  auto text = ReadFile(path);
  if (!text.ok()) return text.status();
  json value = json::parse(*text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": invalid JSON"));
  }
  return value;
}

std::string DumpPretty(const json& value) {
  return value.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

fs::path Sibling(const std::string& path, absl::string_view name) {
  return fs::path(path).parent_path() / std::string(name);
}

Corpus LoadCorpusOrThrow(const std::string& path, std::ostream& err) {
  LoadSummary summary;
  auto corpus = LoadCorpus(path, GuessCorpusFormat(path), {}, &summary);
  if (summary.dropped_empty > 0) {
    err << path << ": dropped " << summary.dropped_empty
        << " sample(s) with empty tokenization\n";
  }
  return OrDataError(std::move(corpus));
}

CueLexicon LoadCues(const std::string& path) {
  if (path.empty()) return CueLexicon::Default();
  return OrDataError(CueLexicon::FromFile(path));
}

// Flags shared by the subcommands that build audit reports.
struct AuditFlags {
  AuditConfig config;
  std::string match_mode = "any";
  std::string normalizer = "total_tokens";
  std::string output_kind = "probability";
  std::string averaging = "macro";
  std::string stopwords;
  int jobs = 1;

  void Resolve() {
    config.match_mode = *ParseMatchMode(match_mode);
    config.normalizer = *ParseLmiNormalizer(normalizer);
    config.output_kind = *ParseOutputKind(output_kind);
    config.averaging = *ParseF1Averaging(averaging);
    config.stopwords = stopwords.empty() ? "default" : stopwords;
  }
};

const CLI::Validator kHeadFraction(
    [](std::string& input) -> std::string {
      double value = 0.0;
      if (!CLI::detail::lexical_cast(input, value) || !(value > 0.0 && value <= 1.0)) {
        return "value must lie in (0, 1]";
      }
      return {};
    },
    "FRACTION in (0,1]");

void AddBins(CLI::App* sub, AuditFlags& f) {
  sub->add_option("--bins", f.config.bins, "Confidence bins M")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void AddLmiFlags(CLI::App* sub, AuditFlags& f) {
  sub->add_option("--head-fraction", f.config.head_fraction,
                  "Share of top-LMI tokens forming a label's head")
      ->check(kHeadFraction)
      ->capture_default_str();
  sub->add_option("--normalizer", f.normalizer, "LMI probability denominator")
      ->check(CLI::IsMember({"total_tokens", "distinct_vocab"}))
      ->capture_default_str();
}

void AddDetectionFlags(CLI::App* sub, AuditFlags& f) {
  sub->add_option("--top-k", f.config.top_k, "Attributed tokens compared per prediction")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--match-mode", f.match_mode,
                  "any: one top token in the head suffices; all: every one")
      ->check(CLI::IsMember({"any", "all"}))
      ->capture_default_str();
  sub->add_option("--stopwords", f.stopwords,
                  "Stopword file, one token per line (default: bundled list)");
  sub->add_option("--averaging", f.averaging, "F1 averaging")
      ->check(CLI::IsMember({"macro", "micro"}))
      ->capture_default_str();
}

int RunTrain(const std::string& train_path, const std::string& out_path,
             std::string loss_path, TrainConfig config, std::ostream& out,
             std::ostream& err) {
  const Corpus corpus = LoadCorpusOrThrow(train_path, err);
  TrainResult result = OrDataError(Train(corpus, config));
  OrDataError(result.model.Save(out_path));
  if (loss_path.empty()) loss_path = out_path + ".loss.csv";
  std::string trace = "epoch,loss\n";
  for (size_t e = 0; e < result.loss_trace.size(); ++e) {
    absl::StrAppendFormat(&trace, "%d,%.17g\n", e, result.loss_trace[e]);
  }
  OrDataError(WriteFile(loss_path, trace));
  out << "trained on " << corpus.size() << " samples; loss "
      << result.loss_trace.front() << " -> " << result.loss_trace.back() << "\n";
  return kExitOk;
}

void WriteReportArtifacts(const AuditReport& report, const std::string& out_path) {
  OrDataError(WriteFile(out_path, report.Serialize()));
  OrDataError(WriteFile(Sibling(out_path, "reliability.csv"),
                        ReliabilityCsv(report.bins)));
  OrDataError(WriteFile(Sibling(out_path, "summary.csv"), SummaryCsv({report})));
}

void PrintSummary(const AuditReport& report, std::ostream& out) {
  out << absl::StrFormat("%s on %s: n=%d F1=%.2f P_sc=%.2f T_sc=%s ECE=%.4f\n",
                         report.model, report.dataset, report.n,
                         report.summary.f1_percent, report.summary.p_sc_percent,
                         report.summary.t_sc.has_value()
                             ? absl::StrFormat("%.2f", *report.summary.t_sc)
                             : std::string("n/a"),
                         report.summary.ece);
}

std::string StemOf(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

absl::StatusOr<AuditReport> RunAudit(const Corpus& train, const Corpus& test,
                                     const MlpClassifier& model,
                                     const AuditConfig& config,
                                     const CueLexicon& cues, int jobs,
                                     std::string dataset, std::string model_id) {
  LmiOptions lmi_options;
  lmi_options.head_fraction = config.head_fraction;
  lmi_options.normalizer = config.normalizer;
  auto table = LmiTable::Compute(train, lmi_options);
  if (!table.ok()) return table.status();

  AttributionOptions attribution;
  attribution.steps = config.ig_steps;
  attribution.top_k = config.top_k;
  attribution.output_kind = config.output_kind;
  auto records = PredictAndAttribute(model, test.samples(), attribution, jobs);
  if (!records.ok()) return records.status();
  if (auto status = AttachVerdicts(*records, *table, config.match_mode, cues);
      !status.ok()) {
    return status;
  }
  return Assemble(*std::move(records), config, std::move(dataset),
                  std::move(model_id));
}

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Calibration and shortcut auditing for text classifiers",
               "shortcut-audit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  std::string section;
  for (int i = 1; i < argc; ++i) {
    if (argv[i][0] != '-') {
      section = argv[i];
      break;
    }
  }
  app.config_formatter(std::make_shared<JsonConfig>(section));
  app.set_config("--config", "", "JSON file of flag values; explicit flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  // train
  CLI::App* train = app.add_subcommand("train", "Train the reference classifier");
  std::string train_path, checkpoint_out, loss_out, preset_path;
  TrainConfig train_config;
  train->fallthrough();
  train->add_option("--train", train_path, "Training corpus (.jsonl or .csv)")
      ->required();
  train->add_option("--out", checkpoint_out, "Checkpoint path")->required();
  train->add_option("--loss-out", loss_out,
                    "Loss trace CSV (default: <out>.loss.csv)");
  train->add_option("--preset", preset_path, "TrainConfig JSON used as the base");
  auto* lr = train->add_option("--lr", train_config.learning_rate, "Adam learning rate")
                 ->check(CLI::PositiveNumber)->capture_default_str();
  auto* epochs = train->add_option("--epochs", train_config.epochs)
                     ->check(CLI::PositiveNumber)->capture_default_str();
  auto* batch = train->add_option("--batch-size", train_config.batch_size)
                    ->check(CLI::PositiveNumber)->capture_default_str();
  auto* clip = train->add_option("--grad-clip", train_config.grad_clip_norm,
                                 "Global gradient-norm clip")
                   ->check(CLI::PositiveNumber)->capture_default_str();
  auto* eps = train->add_option("--adam-epsilon", train_config.adam_epsilon)
                  ->check(CLI::PositiveNumber)->capture_default_str();
  auto* dim = train->add_option("--embedding-dim", train_config.embedding_dim)
                  ->check(CLI::PositiveNumber)->capture_default_str();
  auto* hidden = train->add_option("--hidden-dim", train_config.hidden_dim)
                     ->check(CLI::PositiveNumber)->capture_default_str();
  auto* train_seed = train->add_option("--seed", train_config.seed)
                         ->envname("SHORTCUT_AUDIT_SEED")->capture_default_str();

  // audit
  CLI::App* audit = app.add_subcommand(
      "audit", "LMI fit, attribution, shortcut detection and calibration report");
  audit->fallthrough();
  AuditFlags audit_flags;
  std::string audit_train, audit_test, audit_model, audit_out, audit_attr_out;
  std::string dataset_name, model_name;
  audit->add_option("--train", audit_train, "Corpus the LMI heads are fitted on")
      ->required();
  audit->add_option("--test", audit_test, "Corpus to audit")->required();
  audit->add_option("--model", audit_model, "Checkpoint from `train`")->required();
  audit->add_option("--out", audit_out,
                    "Report JSON; reliability.csv and summary.csv go beside it")
      ->required();
  audit->add_option("--attributions-out", audit_attr_out,
                    "Also write per-prediction attributions as JSONL");
  audit->add_option("--dataset-name", dataset_name, "Default: test file stem");
  audit->add_option("--model-name", model_name, "Default: checkpoint file stem");
  audit->add_option("--ig-steps", audit_flags.config.ig_steps,
                    "Riemann steps m for integrated gradients")
      ->check(CLI::PositiveNumber)->capture_default_str();
  audit->add_option("--output-kind", audit_flags.output_kind,
                    "Model output that is attributed")
      ->check(CLI::IsMember({"probability", "logit"}))->capture_default_str();
  audit->add_option("--jobs", audit_flags.jobs, "Attribution worker threads")
      ->check(CLI::PositiveNumber)->capture_default_str();
  audit->add_option("--seed", audit_flags.config.seed)
      ->envname("SHORTCUT_AUDIT_SEED")->capture_default_str();
  AddBins(audit, audit_flags);
  AddLmiFlags(audit, audit_flags);
  AddDetectionFlags(audit, audit_flags);

  // lmi
  CLI::App* lmi = app.add_subcommand("lmi", "Fit the LMI table and heads");
  lmi->fallthrough();
  AuditFlags lmi_flags;
  std::string lmi_train, lmi_out;
  lmi->add_option("--train", lmi_train, "Training corpus")->required();
  lmi->add_option("--out", lmi_out, "LMI table JSON")->required();
  AddLmiFlags(lmi, lmi_flags);

  // ece
  CLI::App* ece = app.add_subcommand(
      "ece", "Calibration (and, given LMI heads, shortcut metrics) for external "
             "predictions");
  ece->fallthrough();
  AuditFlags ece_flags;
  std::string ece_predictions, ece_out, ece_train, ece_lmi, ece_dataset, ece_model;
  ece->add_option("--predictions", ece_predictions,
                  "Prediction/attribution JSONL")->required();
  ece->add_option("--out", ece_out, "Output JSON")->required();
  auto* ece_train_opt =
      ece->add_option("--train", ece_train, "Corpus to fit LMI heads on");
  ece->add_option("--lmi", ece_lmi, "LMI table from `lmi`")->excludes(ece_train_opt);
  ece->add_option("--dataset-name", ece_dataset, "Default: predictions file stem");
  ece->add_option("--model-name", ece_model)->default_val("external");
  AddBins(ece, ece_flags);
  AddLmiFlags(ece, ece_flags);
  AddDetectionFlags(ece, ece_flags);

  // synth
  CLI::App* synth = app.add_subcommand("synth", "Generate a planted-shortcut corpus");
  synth->fallthrough();
  std::string spec_path, synth_out, synth_test_out;
  double synth_test_fraction = 0.2;
  PlantSpec spec;
  synth->add_option("--spec", spec_path, "PlantSpec JSON used as the base");
  synth->add_option("--out", synth_out, "Corpus JSONL (train side when splitting)")
      ->required();
  auto* test_out_opt = synth->add_option(
      "--test-out", synth_test_out, "Also split off a test corpus to this path");
  synth->add_option("--test-fraction", synth_test_fraction)
      ->check(CLI::Range(0.0, 1.0))->needs(test_out_opt)->capture_default_str();
  auto* token = synth->add_option("--token", spec.token, "Planted token");
  auto* label = synth->add_option("--label", spec.label, "Label the token cues");
  auto* rate = synth->add_option("--co-occurrence", spec.co_occurrence_rate);
  auto* leak = synth->add_option("--leak", spec.leak_rate);
  auto* per_label = synth->add_option("--samples-per-label", spec.samples_per_label)
                        ->check(CLI::PositiveNumber);
  auto* vocab = synth->add_option("--background-vocab", spec.background_vocab_size)
                    ->check(CLI::PositiveNumber);
  auto* synth_seed = synth->add_option("--seed", spec.seed)->envname("SHORTCUT_AUDIT_SEED");

  // report-diff
  CLI::App* diff = app.add_subcommand("report-diff", "Delta between two audit reports");
  diff->fallthrough();
  std::string before_path, after_path, diff_out;
  diff->add_option("--before", before_path)->required();
  diff->add_option("--after", after_path)->required();
  diff->add_option("--out", diff_out, "Delta JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      TrainConfig config = train_config;
      if (!preset_path.empty()) {
        // Preset first, then any explicit flags on top of it.
        config = OrDataError(TrainConfig::FromJson(OrDataError(ReadJson(preset_path))));
        if (lr->count() > 0) config.learning_rate = train_config.learning_rate;
        if (epochs->count() > 0) config.epochs = train_config.epochs;
        if (batch->count() > 0) config.batch_size = train_config.batch_size;
        if (clip->count() > 0) config.grad_clip_norm = train_config.grad_clip_norm;
        if (eps->count() > 0) config.adam_epsilon = train_config.adam_epsilon;
        if (dim->count() > 0) config.embedding_dim = train_config.embedding_dim;
        if (hidden->count() > 0) config.hidden_dim = train_config.hidden_dim;
        if (train_seed->count() > 0) config.seed = train_config.seed;
      }
      OrDataError(config.Validate());
      return RunTrain(train_path, checkpoint_out, loss_out, config, out, err);
    }

    if (audit->parsed()) {
      audit_flags.Resolve();
      const Corpus train_corpus = LoadCorpusOrThrow(audit_train, err);
      const Corpus test_corpus = LoadCorpusOrThrow(audit_test, err);
      const MlpClassifier model = OrDataError(MlpClassifier::Load(audit_model));
      const CueLexicon cues = LoadCues(audit_flags.stopwords);
      AuditReport report = OrDataError(RunAudit(
          train_corpus, test_corpus, model, audit_flags.config, cues,
          audit_flags.jobs, dataset_name.empty() ? StemOf(audit_test) : dataset_name,
          model_name.empty() ? StemOf(audit_model) : model_name));
      WriteReportArtifacts(report, audit_out);
      if (!audit_attr_out.empty()) {
        OrDataError(WriteFile(audit_attr_out,
                              ExportAttributionsJsonl(report.records,
                                                      audit_flags.config.ig_steps)));
      }
      PrintSummary(report, out);
      return kExitOk;
    }

    if (lmi->parsed()) {
      lmi_flags.Resolve();
      const Corpus corpus = LoadCorpusOrThrow(lmi_train, err);
      LmiOptions options;
      options.head_fraction = lmi_flags.config.head_fraction;
      options.normalizer = lmi_flags.config.normalizer;
      const LmiTable table = OrDataError(LmiTable::Compute(corpus, options));
      OrDataError(WriteFile(lmi_out, DumpPretty(table.ToJson())));
      return kExitOk;
    }

    if (ece->parsed()) {
      ece_flags.Resolve();
      std::vector<PredictionRecord> records =
          OrDataError(ImportExternal(ece_predictions));
      for (PredictionRecord& r : records) {
        std::stable_sort(r.top_tokens.begin(), r.top_tokens.end(),
                         [](const AttributedToken& a, const AttributedToken& b) {
                           return a.importance > b.importance;
                         });
        if (static_cast<int>(r.top_tokens.size()) > ece_flags.config.top_k) {
          r.top_tokens.resize(ece_flags.config.top_k);
        }
      }
      std::optional<LmiTable> table;
      if (!ece_train.empty()) {
        const Corpus corpus = LoadCorpusOrThrow(ece_train, err);
        LmiOptions options;
        options.head_fraction = ece_flags.config.head_fraction;
        options.normalizer = ece_flags.config.normalizer;
        table = OrDataError(LmiTable::Compute(corpus, options));
      } else if (!ece_lmi.empty()) {
        table = OrDataError(LmiTable::FromJson(OrDataError(ReadJson(ece_lmi))));
        ece_flags.config.head_fraction = table->head_fraction();
        ece_flags.config.normalizer = table->normalizer();
      }
      const std::string dataset =
          ece_dataset.empty() ? StemOf(ece_predictions) : ece_dataset;
      if (table.has_value()) {
        const CueLexicon cues = LoadCues(ece_flags.stopwords);
        OrDataError(AttachVerdicts(records, *table, ece_flags.config.match_mode, cues));
        AuditReport report = OrDataError(
            Assemble(std::move(records), ece_flags.config, dataset, ece_model));
        WriteReportArtifacts(report, ece_out);
        PrintSummary(report, out);
        return kExitOk;
      }
      const double value =
          OrDataError(ExpectedCalibrationError(records, ece_flags.config.bins));
      const std::vector<BinStats> bins = OrDataError(Bin(records, ece_flags.config.bins));
      json bin_rows = json::array();
      for (const BinStats& b : bins) {
        bin_rows.push_back({{"index", b.index},
                            {"low", b.low},
                            {"high", b.high},
                            {"count", b.count},
                            {"accuracy", b.accuracy},
                            {"mean_confidence", b.mean_confidence}});
      }
      OrDataError(WriteFile(ece_out, DumpPretty({{"dataset", dataset},
                                                 {"n", records.size()},
                                                 {"bins_m", ece_flags.config.bins},
                                                 {"ece", value},
                                                 {"bins", bin_rows}})));
      OrDataError(WriteFile(Sibling(ece_out, "reliability.csv"), ReliabilityCsv(bins)));
      out << absl::StrFormat("ECE=%.4f over %d predictions\n", value, records.size());
      return kExitOk;
    }

    if (synth->parsed()) {
      PlantSpec base;
      if (!spec_path.empty()) {
        base = OrDataError(PlantSpec::FromJson(OrDataError(ReadJson(spec_path))));
      }
      if (token->count() > 0) base.token = spec.token;
      if (label->count() > 0) base.label = spec.label;
      if (rate->count() > 0) base.co_occurrence_rate = spec.co_occurrence_rate;
      if (leak->count() > 0) base.leak_rate = spec.leak_rate;
      if (per_label->count() > 0) base.samples_per_label = spec.samples_per_label;
      if (vocab->count() > 0) base.background_vocab_size = spec.background_vocab_size;
      if (synth_seed->count() > 0) base.seed = spec.seed;
      const Corpus corpus = OrDataError(Generate(base));
      if (synth_test_out.empty()) {
        OrDataError(WriteFile(synth_out, CorpusToJsonl(corpus)));
        return kExitOk;
      }
      auto [train_part, test_part] = OrDataError(Split(
          corpus, {1.0 - synth_test_fraction, synth_test_fraction}, base.seed));
      OrDataError(WriteFile(synth_out, CorpusToJsonl(train_part)));
      OrDataError(WriteFile(synth_test_out, CorpusToJsonl(test_part)));
      return kExitOk;
    }

    if (diff->parsed()) {
      const AuditReport before =
          OrDataError(AuditReport::Parse(OrDataError(ReadFile(before_path))));
      const AuditReport after =
          OrDataError(AuditReport::Parse(OrDataError(ReadFile(after_path))));
      const ReportDelta delta = OrDataError(Diff(before, after));
      OrDataError(WriteFile(diff_out, DumpPretty(delta.ToJson())));
      return kExitOk;
    }
  } catch (const DataError& e) {
    err << "error: " << e.status.message() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace shortcut_audit
