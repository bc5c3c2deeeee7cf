// Copyright 2026 The ITR Authors.
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

#ifndef ITR_CLI_H_
#define ITR_CLI_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "itr/cohort.h"
#include "itr/evaluation.h"
#include "itr/forest.h"
#include "itr/learners.h"
#include "itr/rist.h"
#include "itr/strata.h"

namespace itr::cli {

inline constexpr const char* kVersion = "1.0.0";

struct OutcomeColumns {
  std::string name;
  std::string time_column;
  std::string event_column;
};

struct RunConfig {
  std::string input;
  SchemaConfig schema;
  // Empty: a single outcome named "outcome" read from the schema columns.
  std::vector<OutcomeColumns> outcomes;
  std::vector<double> horizons = {365.0};
  // Tailored learners; the zero-order comparator is always evaluated.
  std::vector<LearnerKind> learners = {LearnerKind::kRwl, LearnerKind::kRf, LearnerKind::kEarl};
  int k = 10;
  std::uint64_t seed = 1;
  std::string out = "itr_out";
  bool normalized = true;
  double clip = 0.01;
  std::optional<double> known_propensity;
  bool select_variables = true;
  int top_m = 10;
  int selection_folds = 10;
  ForestParams importance_forest;
  ForestParams propensity_forest = EvaluationOptions::DefaultPropensityForest();
  RistParams rist;
  LearnerConfig learner;

  // Throws ArgumentError; `check_input` also requires the input file.
  void Validate(bool check_input = true) const;
  static RunConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  EvaluationOptions Evaluation() const;
  std::vector<OutcomeColumns> ResolvedOutcomes() const;
  // Schema for one outcome: its time/event columns, other outcomes ignored.
  SchemaConfig SchemaFor(const OutcomeColumns& outcome) const;
};

RunConfig LoadRunConfig(const std::string& path);

// Stratum risks, the three standardized risks and the tailored rule.
void WriteToyReport(std::ostream& out, const StratifiedTable& table, const std::string& title);

struct PipelineResult {
  std::vector<ReportRow> rows;
  std::vector<std::string> selected;
  std::vector<std::string> files;  // written, relative to the output directory
};

// Variable selection, cross-validated evaluation for every outcome and
// horizon, report files and manifest in config.out.
PipelineResult RunPipeline(const RunConfig& config, std::ostream& log);

// Full command-line entry point. Returns the process exit code: 0 on
// success, 2 for usage or configuration errors, 1 for any other failure.
int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace itr::cli

#endif  // ITR_CLI_H_
