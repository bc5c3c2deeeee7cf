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

// Recursively imputed survival trees. An ensemble of extremely randomized
// survival trees (random thresholds scored by the log-rank statistic, leaves
// holding Kaplan-Meier curves) is fitted on per-arm half samples; subjects
// censored before the horizon receive a draw from their conditional
// ensemble survival distribution. Each further cycle refits on the completed
// data and redraws from the original censoring times.

#ifndef ITR_RIST_H_
#define ITR_RIST_H_

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "itr/cohort.h"
#include "itr/random.h"
#include "itr/survival.h"

namespace itr {

struct RistParams {
  int n_trees = 50;
  int n_imputation_cycles = 2;
  int min_events_per_leaf = 1;
  int n_random_splits = 10;
  int min_leaf_size = 6;
  int mtry = 0;  // 0: every covariate is a split candidate
  double arm_fraction = 0.5;

  void Validate() const;
  static RistParams FromJson(const nlohmann::json& j, const RistParams& defaults);
  static RistParams FromJson(const nlohmann::json& j) { return FromJson(j, RistParams()); }
  nlohmann::json ToJson() const;
  friend bool operator==(const RistParams&, const RistParams&) = default;
};

struct SurvivalTreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf = -1;  // index into SurvivalTree::curves
  friend bool operator==(const SurvivalTreeNode&, const SurvivalTreeNode&) = default;
};

struct SurvivalTree {
  std::vector<SurvivalTreeNode> nodes;
  std::vector<SurvivalCurve> curves;
  std::vector<int> leaf_events;

  const SurvivalCurve& Curve(std::span<const double> x) const;
  friend bool operator==(const SurvivalTree&, const SurvivalTree&) = default;
};

class RistModel {
 public:
  const RistParams& params() const { return params_; }
  double horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_features() const { return num_features_; }
  const std::vector<SurvivalTree>& trees() const { return trees_; }

  // Ensemble average of the leaf curves reached by x.
  SurvivalCurve EnsembleCurve(std::span<const double> x) const;

  friend bool operator==(const RistModel&, const RistModel&) = default;

 private:
  friend RistModel FitRist(const Cohort&, const RistParams&, std::uint64_t);
  RistParams params_;
  double horizon_ = 0.0;
  std::uint64_t seed_ = 0;
  std::size_t num_features_ = 0;
  std::vector<SurvivalTree> trees_;
};

// Requires a horizon-restricted cohort (RestrictHorizon) with at least one
// event before the horizon; throws FitError otherwise.
RistModel FitRist(const Cohort& cohort, const RistParams& params, std::uint64_t seed);

// Draws t in (c, horizon] with P(T > t | T > c) taken from the ensemble
// curve: u ~ U(0, S(c)), t = inf{s : S(s) <= u}; remaining mass maps to the
// horizon.
double DrawConditionalTime(const SurvivalCurve& curve, double censor_time,
                           double horizon, Rng& rng);

// One imputation pass: every flagged subject receives a draw. Subjects
// without the flag are returned unchanged. Throws ArgumentError on a
// horizon mismatch.
Cohort ImputeWithModel(const RistModel& model, const Cohort& cohort,
                       std::uint64_t seed);

struct ImputationResult {
  Cohort cohort;           // completed data, no imputation flags
  RistModel final_model;   // model used for the last draw
  std::vector<Cohort> cycles;  // completed data after each cycle
};

// Full recursive procedure starting from an already fitted model: impute,
// then for each remaining cycle refit on the completed data and redraw from
// the original censoring times.
ImputationResult ImputeCensored(const RistModel& model, const Cohort& cohort,
                                std::uint64_t seed);

// FitRist followed by ImputeCensored. A cohort without flagged subjects is
// returned as is (no model is fitted; final_model is empty).
ImputationResult FitAndImpute(const Cohort& cohort, const RistParams& params,
                              std::uint64_t seed);

}  // namespace itr

#endif  // ITR_RIST_H_
