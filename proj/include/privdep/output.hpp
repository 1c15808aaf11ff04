//
// Copyright 2026 The privdep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "privdep/hdtest.hpp"
#include "privdep/privacy.hpp"

namespace privdep {

nlohmann::json ledger_json(const PrivacyBudget& budget);

nlohmann::json extremal_json(const ExtremalEstimate& estimate);

// Result document with the fixed key set {decision, branch, delta, deltaHat,
// normDP, quantile, extremal, ledger}; deltaHat is null unless a scan ran.
nlohmann::json outcome_json(const TestOutcome& outcome,
                            const PrivacyBudget& budget,
                            std::optional<double> delta_hat = std::nullopt);

nlohmann::json scan_json(const ScanResult& scan, const PrivacyBudget& budget);

struct VerifyReport {
  bool consistent = false;
  bool recorded_decision = false;
  bool recomputed_decision = false;
  std::string branch;
};

// Re-derives the decision of a result document from its released fields
// (pure post-processing) and compares with the recorded decision.
VerifyReport verify_result(const nlohmann::json& document);

}  // namespace privdep
