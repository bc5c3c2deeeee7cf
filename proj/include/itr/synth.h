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

// Synthetic cohorts with known ground truth.
//
// Continuous scenarios draw Y = b(X) + A * c(X) / 2 + noise (floored at 0),
// so the contrast between arms is c(X) and the optimal rule is sign(c).
// Survival scenarios draw exponential event times with mean
// b(X) + A * c(X) / 2, optionally censored by an independent uniform whose
// upper bound is calibrated to a target censoring rate. Table scenarios
// resample a stratified count table.

#ifndef ITR_SYNTH_H_
#define ITR_SYNTH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "itr/cohort.h"
#include "itr/function.h"
#include "itr/rule.h"
#include "itr/strata.h"

namespace itr {

enum class CovariateLaw { kUniform, kNormal, kBinary };
enum class RewardMode { kContinuous, kSurvival, kTable };

struct ScenarioSpec {
  std::string name = "scenario";
  int p = 1;

  CovariateLaw law = CovariateLaw::kUniform;
  double low = -1.0, high = 1.0;  // uniform
  double mean = 0.0, sd = 1.0;    // normal
  std::vector<double> prevalence = {0.5};  // binary; one value is broadcast

  // P(A = +1 | x): prob_plus, or logistic(intercept + coefficients . x).
  bool logistic_assignment = false;
  double prob_plus = 0.5;
  double assign_intercept = 0.0;
  std::vector<double> assign_coefficients;

  RewardMode mode = RewardMode::kContinuous;
  CovariateFunction baseline = CovariateFunction::Constant(0.0);
  CovariateFunction contrast = CovariateFunction::Constant(0.0);
  double noise_sd = 0.0;

  double censoring_rate = 0.0;  // survival only; 0 disables censoring
  std::optional<double> horizon;
  Arm tie = Arm::kMinus;

  // Table mode: subjects resampled from the table; survivors get
  // reward_scale, deaths 0.
  std::optional<StratifiedTable> table;
  double reward_scale = 1.0;

  void Validate() const;
  static ScenarioSpec FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

ScenarioSpec LoadScenarioSpec(const std::string& path);

// Built-in table scenario ("table1", "table3").
ScenarioSpec TableScenario(const StratifiedTable& table, double reward_scale);

struct MonteCarloValue {
  double value = 0.0;
  double se = 0.0;
};

struct ScenarioTruth {
  TreatmentRule optimal = TreatmentRule::Universal(Arm::kMinus);
  MonteCarloValue optimal_value;
  MonteCarloValue minus_value;  // universal(-1)
  MonteCarloValue plus_value;   // universal(+1)
};

// One subject per table count unit with stratum indicators as covariates,
// reward 0 for deaths and reward_scale for survivors; shuffled by seed. The
// cohort horizon is set to reward_scale.
Cohort GenerateFromTable(const StratifiedTable& table, std::uint64_t seed,
                         double reward_scale = 1.0);

// Draws covariates, assignment and outcomes. Continuous and table cohorts
// carry completed rewards; survival cohorts carry raw (time, event) pairs
// and need RestrictHorizon.
Cohort GenerateCohort(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed);

// Monte Carlo mean of the uncensored (horizon-restricted) reward when every
// draw is assigned rule(X). Requires mc_n >= 10^4.
MonteCarloValue TrueValue(const ScenarioSpec& spec, const TreatmentRule& rule,
                          std::size_t mc_n, std::uint64_t seed);

// Optimal rule and oracle values, all from the same Monte Carlo draws.
ScenarioTruth ComputeTruth(const ScenarioSpec& spec, std::size_t mc_n, std::uint64_t seed);

struct Scenario {
  Cohort cohort;
  ScenarioTruth truth;
};
Scenario GenerateScenario(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed,
                          std::size_t mc_n = 1000000);

// Conditional expected reward E[Y | X = x, A = a].
double ConditionalMean(const ScenarioSpec& spec, std::span<const double> x, Arm a);
// P(A = +1 | X = x) under the assignment mechanism.
double AssignmentProbability(const ScenarioSpec& spec, std::span<const double> x);
// Upper bound of the uniform censoring law (0 when censoring is off).
double CensoringUpperBound(const ScenarioSpec& spec);

}  // namespace itr

#endif  // ITR_SYNTH_H_
