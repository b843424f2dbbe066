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

#ifndef SHORTCUT_AUDIT_CLI_H_
#define SHORTCUT_AUDIT_CLI_H_

#include <ostream>
#include <string>

#include "absl/status/statusor.h"
#include "shortcut_audit/corpus.h"
#include "shortcut_audit/lmi.h"
#include "shortcut_audit/model.h"
#include "shortcut_audit/report.h"
#include "shortcut_audit/shortcut.h"

namespace shortcut_audit {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
};

// LMI fit on `train`, integrated-gradients attribution of every `test`
// prediction, shortcut detection, then calibration and trade-off metrics.
absl::StatusOr<AuditReport> RunAudit(const Corpus& train, const Corpus& test,
                                     const MlpClassifier& model,
                                     const AuditConfig& config,
                                     const CueLexicon& cues, int jobs,
                                     std::string dataset, std::string model_id);

// Entry point of the `shortcut-audit` tool. Subcommands: train, audit, lmi,
// ece, synth, report-diff. Returns an ExitCode.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace shortcut_audit

#endif  // SHORTCUT_AUDIT_CLI_H_
