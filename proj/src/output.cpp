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

#include "privdep/output.hpp"

#include <limits>

namespace privdep {

nlohmann::json ledger_json(const PrivacyBudget& budget) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& entry : budget.entries()) {
    entries.push_back({{"mechanism", entry.mechanism},
                       {"rho", entry.rho},
                       {"delta", entry.delta}});
  }
  return {{"declared", {{"rho", budget.rho()}, {"delta", budget.delta()}}},
          {"spent",
           {{"rho", budget.rho_spent()}, {"delta", budget.delta_spent()}}},
          {"entries", entries}};
}

nlohmann::json extremal_json(const ExtremalEstimate& estimate) {
  nlohmann::json doc;
  doc["outcome"] = estimate.bottom ? "bottom" : "set";
  nlohmann::json indices = nlohmann::json::array();
  for (int index : estimate.indices) indices.push_back(index + 1);  // 1-based
  doc["indices"] = indices;
  doc["kHat"] = estimate.k_hat;
  doc["truncated"] = estimate.truncated;
  return doc;
}

nlohmann::json outcome_json(const TestOutcome& outcome,
                            const PrivacyBudget& budget,
                            std::optional<double> delta_hat) {
  nlohmann::json doc;
  doc["decision"] = outcome.reject;
  doc["branch"] = branch_name(outcome.branch);
  doc["delta"] = outcome.delta;
  doc["deltaHat"] =
      delta_hat.has_value() ? nlohmann::json(*delta_hat) : nlohmann::json();
  doc["normDP"] = outcome.released_norm_dp;
  doc["quantile"] = outcome.quantile;
  doc["extremal"] = outcome.extremal.has_value()
                        ? extremal_json(*outcome.extremal)
                        : nlohmann::json();
  doc["ledger"] = ledger_json(budget);
  return doc;
}

nlohmann::json scan_json(const ScanResult& scan, const PrivacyBudget& budget) {
  return outcome_json(scan.base, budget, scan.delta_hat);
}

VerifyReport verify_result(const nlohmann::json& document) {
  VerifyReport report;
  report.branch = document.at("branch").get<std::string>();
  report.recorded_decision = document.at("decision").get<bool>();
  // A degenerate (infinite) quantile serializes as null.
  const auto& quantile_field = document.at("quantile");
  const double quantile = quantile_field.is_null()
                              ? std::numeric_limits<double>::infinity()
                              : quantile_field.get<double>();
  report.recomputed_decision = outcome_decision(
      branch_from_name(report.branch), document.at("normDP").get<double>(),
      document.at("delta").get<double>(), quantile);
  report.consistent = report.recorded_decision == report.recomputed_decision;
  return report;
}

}  // namespace privdep
