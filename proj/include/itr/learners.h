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

#ifndef ITR_LEARNERS_H_
#define ITR_LEARNERS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "itr/classifier.h"
#include "itr/cohort.h"
#include "itr/forest.h"
#include "itr/rule.h"

namespace itr {

enum class LearnerKind { kZero, kRf, kRwl, kEarl };

const char* LearnerName(LearnerKind kind);  // "zero-order", "rf", "rwl", "earl"
// Accepts "zero", "zero-order", "rf", "rwl", "earl".
LearnerKind ParseLearner(const std::string& name);

enum class OutcomeModelKind { kForest, kLeastSquares };

struct LearnerConfig {
  Surrogate surrogate = Surrogate::kRamp;  // RWL: ramp or hinge
  std::optional<double> lambda;            // unset: inner cross-validation
  std::vector<double> lambda_grid = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  int inner_folds = 5;
  int max_dc_iterations = 20;
  double tolerance = 1e-6;
  OutcomeModelKind outcome_model = OutcomeModelKind::kForest;
  ForestParams outcome_forest = DefaultOutcomeForest();
  Basis basis = Basis::kLinear;
  // Policy forests of the rf learner.
  ForestParams policy_forest;

  static ForestParams DefaultOutcomeForest() {
    ForestParams p;
    p.n_trees = 100;
    return p;
  }

  void Validate() const;
  static LearnerConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

struct LearnerFit {
  TreatmentRule rule = TreatmentRule::Universal(Arm::kMinus);
  bool converged = true;
  int iterations = 0;
  double lambda = 0.0;
  std::vector<std::string> warnings;
  // Zero-order only: IPW values of universal(-1) and universal(+1).
  std::optional<std::array<double, 2>> universal_values;
};

// Universal rule with the larger IPW value; exact ties go to `tie`.
LearnerFit FitZeroOrder(const Cohort& cohort, const PropensityModel& propensity,
                        bool normalized = true, Arm tie = Arm::kMinus);

// One reward forest per arm, rule = argmax of predicted reward. Throws
// FitError when an arm has fewer than 2 * min_leaf subjects.
LearnerFit FitRfPolicy(const Cohort& cohort, const ForestParams& params, std::uint64_t seed);

// Residual weighted learning with a linear (or quadratic-basis) rule.
// Throws DegenerateError when every residual is zero.
LearnerFit FitRwl(const Cohort& cohort, const PropensityModel& propensity,
                  const LearnerConfig& config, std::uint64_t seed);

// Efficient augmentation and relaxation learning: logistic surrogate on the
// doubly robust pseudo-contrast. Throws DegenerateError when every
// pseudo-contrast is zero.
LearnerFit FitEarl(const Cohort& cohort, const PropensityModel& propensity,
                   const LearnerConfig& config, std::uint64_t seed);

LearnerFit FitLearner(LearnerKind kind, const Cohort& cohort,
                      const PropensityModel& propensity, const LearnerConfig& config,
                      std::uint64_t seed);

// Arm-specific outcome predictions for the training cohort. For forests the
// subject's own arm uses out-of-bag predictions.
struct OutcomePredictions {
  std::vector<double> minus;
  std::vector<double> plus;
};
OutcomePredictions FitOutcomeModels(const Cohort& cohort, const LearnerConfig& config,
                                    std::uint64_t seed);

// psi_i = mu(x,+1) - mu(x,-1) + A_i (Y_i - mu(x, A_i)) / pi(A_i | x).
std::vector<double> PseudoContrast(std::span<const double> reward,
                                   std::span<const Arm> treatment,
                                   const OutcomePredictions& mu,
                                   std::span<const double> received_prob);

// Main-effects prediction m(x) ignoring treatment, out-of-bag for forests.
std::vector<double> FitMainEffects(const Cohort& cohort, const LearnerConfig& config,
                                   std::uint64_t seed);

}  // namespace itr

#endif  // ITR_LEARNERS_H_
