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

// Bagged CART forests for classification (class probabilities) and
// regression. Splits are searched exactly over the sorted unique values of
// `mtry` randomly drawn covariates; equal gains resolve to the lowest
// covariate index, then the lowest threshold.

#ifndef ITR_FOREST_H_
#define ITR_FOREST_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "itr/cohort.h"
#include "itr/matrix.h"

namespace itr {

// 1 - sum_c (n_c / n)^2. Throws ArgumentError when every count is zero.
double GiniImpurity(std::span<const std::int64_t> class_counts);

enum class ForestMode { kClassification, kRegression };

struct ForestParams {
  int n_trees = 200;
  int mtry = 0;  // 0 selects ceil(p / 3)
  int min_leaf = 5;
  int max_depth = 0;  // 0 means unlimited
  double sample_fraction = 1.0;
  bool replace = true;

  int ResolveMtry(std::size_t p) const;
  void Validate(std::size_t p) const;
  static ForestParams FromJson(const nlohmann::json& j, const ForestParams& defaults);
  static ForestParams FromJson(const nlohmann::json& j) { return FromJson(j, ForestParams()); }
  nlohmann::json ToJson() const;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> value;  // class proportions, or {mean}
  int count = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& Leaf(std::span<const double> x) const;
  int Depth() const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

class Forest {
 public:
  Forest() = default;

  ForestMode mode() const { return mode_; }
  const ForestParams& params() const { return params_; }
  std::size_t num_features() const { return num_features_; }
  int num_classes() const { return num_classes_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Tree>& trees() const { return trees_; }
  const std::vector<std::vector<std::uint32_t>>& oob() const { return oob_; }
  std::size_t num_training_rows() const { return num_rows_; }
  // Total impurity decrease per covariate, normalized to sum to 1.
  const std::vector<double>& gini_importance() const { return gini_importance_; }

  // Class probabilities (classification) or {mean} (regression).
  std::vector<double> Predict(std::span<const double> x) const;
  double PredictValue(std::span<const double> x) const;
  double PredictProbability(std::span<const double> x, int cls) const;

  // Predictions for the training rows using only trees for which the row is
  // out-of-bag. Rows that are in-bag for every tree fall back to the full
  // ensemble. `x` must be the training matrix.
  std::vector<std::vector<double>> PredictOob(const Matrix& x) const;
  // OOB misclassification rate (classification) or mean squared error.
  double OobError(const Matrix& x, std::span<const double> y) const;

  nlohmann::json ToJson() const;
  static Forest FromJson(const nlohmann::json& j);

  friend bool operator==(const Forest&, const Forest&) = default;

 private:
  friend Forest FitForest(const Matrix&, std::span<const double>, ForestMode,
                          const ForestParams&, std::uint64_t);
  void CheckDimension(std::size_t p) const;

  ForestMode mode_ = ForestMode::kRegression;
  ForestParams params_;
  std::size_t num_features_ = 0;
  std::size_t num_rows_ = 0;
  int num_classes_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<Tree> trees_;
  std::vector<std::vector<std::uint32_t>> oob_;
  std::vector<double> gini_importance_;
};

// Classification targets are class indices 0..C-1 stored as doubles.
Forest FitForest(const Matrix& x, std::span<const double> y, ForestMode mode,
                 const ForestParams& params, std::uint64_t seed);

// Probability forest for P(A = +1 | X), clipped to [clip, 1 - clip].
class PropensityModel {
 public:
  PropensityModel(Forest forest, double clip);
  // Known assignment probability, independent of X.
  static PropensityModel Constant(double prob_plus, double clip = 0.0);

  double clip() const { return clip_; }
  bool has_forest() const { return forest_.has_value(); }
  const Forest& forest() const { return *forest_; }

  double ProbPlus(std::span<const double> x) const;
  // Probability of the given arm.
  double ProbOf(Arm a, std::span<const double> x) const;
  // Probability of each subject's received arm.
  std::vector<double> ReceivedProbabilities(const Cohort& cohort) const;
  // Same for the cohort the forest was fitted on, using out-of-bag
  // predictions so that in-sample overfitting does not push weights to the
  // clip bounds. Falls back to ReceivedProbabilities when the row count
  // differs from the forest's training data.
  std::vector<double> TrainingProbabilities(const Cohort& training) const;

  nlohmann::json ToJson() const;
  static PropensityModel FromJson(const nlohmann::json& j);

 private:
  PropensityModel() = default;
  std::optional<Forest> forest_;
  double constant_ = 0.5;
  double clip_ = 0.01;
};

PropensityModel FitPropensity(const Cohort& cohort, const ForestParams& params,
                              std::uint64_t seed, double clip = 0.01);

}  // namespace itr

#endif  // ITR_FOREST_H_
