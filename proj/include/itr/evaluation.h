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

// K-fold cross-validated value estimation. Each fold fits the propensity
// model, the censoring imputation and every learner on the training part and
// scores the fitted rule on the held-out part with the IPW estimator. The
// same folds, propensity fit and imputation are shared by all learners so
// that per-fold differences against the zero-order rule are paired.

#ifndef ITR_EVALUATION_H_
#define ITR_EVALUATION_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "itr/cohort.h"
#include "itr/forest.h"
#include "itr/learners.h"
#include "itr/rist.h"
#include "itr/rule.h"

namespace itr {

struct EvaluationOptions {
  int k = 10;
  bool normalized = true;
  double clip = 0.01;
  // Known randomization probability of arm +1; unset fits a forest.
  std::optional<double> known_propensity;
  ForestParams propensity_forest = DefaultPropensityForest();
  RistParams rist;
  LearnerConfig learner;

  static ForestParams DefaultPropensityForest() {
    ForestParams p;
    p.n_trees = 100;
    return p;
  }
  void Validate() const;
};

struct Difference {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct ValueEstimate {
  std::string rule;
  double point = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_folds = 0;
  std::vector<double> fold_values;
  std::uint64_t fold_fingerprint = 0;
  std::optional<Difference> comparator_difference;
};

// point = mean, se = sd / sqrt(k), CI = point +/- 1.96 se.
ValueEstimate SummarizeFolds(std::string rule, std::vector<double> fold_values,
                             std::uint64_t fingerprint);

struct FoldDiagnostics {
  int fold = 0;
  std::string learner;
  double propensity_min = 0.0;  // training-fold P(A = +1 | X)
  double propensity_max = 0.0;
  double censored_fraction = 0.0;  // training subjects needing imputation
  bool converged = true;
  int iterations = 0;
  double lambda = 0.0;
  double value = 0.0;
  std::string warnings;
};

// Fits a rule on a completed training fold.
using RuleFitter = std::function<LearnerFit(const Cohort& train, const PropensityModel& propensity,
                                            std::uint64_t seed)>;

struct NamedFitter {
  std::string name;
  RuleFitter fit;
};

struct EvaluationResult {
  FoldAssignment folds{2, {0, 1}};
  std::vector<ValueEstimate> estimates;  // one per fitter, input order
  std::vector<FoldDiagnostics> diagnostics;
};

// `cohort` must carry a horizon (RestrictHorizon) or completed rewards.
// Any failure is rethrown as EvaluationError naming the fold, stage and
// learner.
EvaluationResult EvaluateFitters(const Cohort& cohort, const std::vector<NamedFitter>& fitters,
                                 const EvaluationOptions& options, std::uint64_t seed);

EvaluationResult EvaluateLearners(const Cohort& cohort, const std::vector<LearnerKind>& learners,
                                  const EvaluationOptions& options, std::uint64_t seed);

ValueEstimate CrossValidatedValue(const Cohort& cohort, LearnerKind learner,
                                  const EvaluationOptions& options, std::uint64_t seed);

// Fills comparator_difference of every estimate from paired per-fold
// differences: mean +/- 1.96 sd / sqrt(k). Throws ArgumentError when fold
// structures differ.
std::vector<ValueEstimate> CompareToZeroOrder(const std::vector<ValueEstimate>& learners,
                                              const ValueEstimate& zero_order);

struct ReportRow {
  std::string reward_type;
  double horizon_days = 0.0;
  ValueEstimate estimate;
};

// Columns rule,reward_type,horizon_days,value,ci_low,ci_high,diff,
// diff_ci_low,diff_ci_high. Difference fields are empty for the comparator.
void WriteReportCsv(std::ostream& out, const std::vector<ReportRow>& rows);
// Aligned text version: value (CI) and difference (CI) per row.
void WriteReportText(std::ostream& out, const std::vector<ReportRow>& rows);

void WriteDiagnosticsCsv(std::ostream& out, const std::vector<FoldDiagnostics>& diagnostics,
                         const std::string& reward_type, double horizon_days);
void WriteDiagnosticsHeader(std::ostream& out);

}  // namespace itr

#endif  // ITR_EVALUATION_H_
