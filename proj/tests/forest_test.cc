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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itr/errors.h"
#include "itr/forest.h"
#include "itr/importance.h"
#include "itr/random.h"
#include "itr/strata.h"
#include "itr/synth.h"

namespace itr {
namespace {

Matrix UniformMatrix(std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = u(rng);
  }
  return x;
}

std::vector<double> ThresholdLabels(const Matrix& x) {
  std::vector<double> y(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) y[i] = x(i, 0) > 0.0 ? 1.0 : 0.0;
  return y;
}

TEST(Gini, Examples) {
  const std::vector<std::int64_t> even{5, 5}, pure{10, 0}, skew{7, 3};
  EXPECT_DOUBLE_EQ(GiniImpurity(even), 0.5);
  EXPECT_DOUBLE_EQ(GiniImpurity(pure), 0.0);
  EXPECT_NEAR(GiniImpurity(skew), 0.42, 1e-15);
  const std::vector<std::int64_t> zero{0, 0};
  EXPECT_THROW(GiniImpurity(zero), ArgumentError);
}

TEST(Gini, Properties) {
  Rng rng(1);
  std::uniform_int_distribution<int> d(0, 40);
  for (int rep = 0; rep < 300; ++rep) {
    const int k = 2 + rep % 4;
    std::vector<std::int64_t> c(k);
    for (auto& v : c) v = d(rng);
    if (std::accumulate(c.begin(), c.end(), std::int64_t{0}) == 0) c[0] = 1;
    const double g = GiniImpurity(c);
    // Maximal at uniform counts.
    EXPECT_LE(g, 1.0 - 1.0 / k + 1e-12);
    // Zero iff a single class is present.
    const int nonzero = static_cast<int>(std::count_if(c.begin(), c.end(), [](auto v) { return v > 0; }));
    EXPECT_EQ(g == 0.0, nonzero == 1);
    // Permutation invariant.
    auto shuffled = c;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_NEAR(GiniImpurity(shuffled), g, 1e-15);
  }
}

TEST(Forest, SeparableThresholdHasLowOobError) {
  const Matrix x = UniformMatrix(600, 4, 2);
  const auto y = ThresholdLabels(x);
  ForestParams p;
  p.n_trees = 100;
  const Forest f = FitForest(x, y, ForestMode::kClassification, p, 3);
  EXPECT_LT(f.OobError(x, y), 0.05);
  EXPECT_EQ(f.trees().size(), 100u);
  for (const auto& tree : f.trees()) {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        EXPECT_GE(node.count, p.min_leaf);
      } else {
        EXPECT_TRUE(std::isfinite(node.threshold));
      }
    }
  }
}

TEST(Forest, ConstantRegressionTarget) {
  const Matrix x = UniformMatrix(50, 3, 4);
  const std::vector<double> y(50, 7.25);
  ForestParams p;
  p.n_trees = 20;
  const Forest f = FitForest(x, y, ForestMode::kRegression, p, 1);
  const Matrix probe = UniformMatrix(20, 3, 5);
  for (std::size_t i = 0; i < probe.rows(); ++i) EXPECT_EQ(f.PredictValue(probe.row(i)), 7.25);
}

TEST(Forest, SingleClassClassificationRejected) {
  const Matrix x = UniformMatrix(20, 2, 4);
  const std::vector<double> y(20, 1.0);
  EXPECT_THROW(FitForest(x, y, ForestMode::kClassification, ForestParams{}, 1), ArgumentError);
}

TEST(Forest, DeterministicAndSerializable) {
  const Matrix x = UniformMatrix(200, 5, 6);
  const auto y = ThresholdLabels(x);
  ForestParams p;
  p.n_trees = 30;
  const Forest a = FitForest(x, y, ForestMode::kClassification, p, 42);
  const Forest b = FitForest(x, y, ForestMode::kClassification, p, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, FitForest(x, y, ForestMode::kClassification, p, 43));
  const Forest back = Forest::FromJson(nlohmann::json::parse(a.ToJson().dump()));
  EXPECT_EQ(back, a);
}

TEST(Forest, SingleTreePureLeaf) {
  const Matrix x = Matrix::FromRows({{-2}, {-1}, {1}, {2}});
  const std::vector<double> y{0, 0, 1, 1};
  ForestParams p;
  p.n_trees = 1;
  p.replace = false;
  p.min_leaf = 1;
  const Forest f = FitForest(x, y, ForestMode::kClassification, p, 0);
  const std::vector<double> probe{1.5};
  EXPECT_EQ(f.PredictProbability(probe, 1), 1.0);
  const std::vector<double> wrong{1.0, 2.0};
  EXPECT_THROW(f.Predict(wrong), ArgumentError);
  // Without bootstrap there are no out-of-bag rows.
  EXPECT_THROW(OobPermutationImportance(f, x, y, 0), EvaluationError);
}

TEST(Forest, IdenticalStumpsMatchSingleStump) {
  const Matrix x = UniformMatrix(100, 1, 8);
  const auto y = ThresholdLabels(x);
  ForestParams p;
  p.replace = false;
  p.max_depth = 1;
  p.min_leaf = 1;
  p.n_trees = 1;
  const Forest one = FitForest(x, y, ForestMode::kRegression, p, 0);
  p.n_trees = 10;
  const Forest ten = FitForest(x, y, ForestMode::kRegression, p, 0);
  const Matrix probe = UniformMatrix(50, 1, 9);
  for (std::size_t i = 0; i < probe.rows(); ++i) {
    EXPECT_NEAR(ten.PredictValue(probe.row(i)), one.PredictValue(probe.row(i)), 1e-12);
  }
}

TEST(Forest, ProbabilitiesSumToOne) {
  const Matrix x = UniformMatrix(300, 3, 10);
  std::vector<double> y(300);
  for (std::size_t i = 0; i < 300; ++i) y[i] = static_cast<double>(i % 3);
  ForestParams p;
  p.n_trees = 25;
  const Forest f = FitForest(x, y, ForestMode::kClassification, p, 1);
  const Matrix probe = UniformMatrix(100, 3, 11);
  for (std::size_t i = 0; i < probe.rows(); ++i) {
    const auto prob = f.Predict(probe.row(i));
    EXPECT_NEAR(std::accumulate(prob.begin(), prob.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(Forest, RegressionPredictionsWithinTargetRange) {
  const Matrix x = UniformMatrix(300, 3, 12);
  Rng rng(13);
  std::normal_distribution<double> noise(0.0, 5.0);
  std::vector<double> y(300);
  for (std::size_t i = 0; i < 300; ++i) y[i] = 10.0 * x(i, 0) + noise(rng);
  ForestParams p;
  p.n_trees = 40;
  const Forest f = FitForest(x, y, ForestMode::kRegression, p, 2);
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const Matrix probe = UniformMatrix(200, 3, 14);
  for (std::size_t i = 0; i < probe.rows(); ++i) {
    const double v = f.PredictValue(probe.row(i));
    EXPECT_GE(v, *lo);
    EXPECT_LE(v, *hi);
  }
}

TEST(Forest, MoreTreesDoNotHurtOobError) {
  const Matrix x = UniformMatrix(400, 5, 15);
  Rng rng(16);
  std::bernoulli_distribution flip(0.1);
  auto y = ThresholdLabels(x);
  for (auto& v : y) {
    if (flip(rng)) v = 1.0 - v;
  }
  ForestParams p;
  p.n_trees = 50;
  const double e50 = FitForest(x, y, ForestMode::kClassification, p, 1).OobError(x, y);
  p.n_trees = 500;
  const double e500 = FitForest(x, y, ForestMode::kClassification, p, 1).OobError(x, y);
  EXPECT_LE(e500, e50 + 0.02);
}

TEST(ForestParams, Validation) {
  ForestParams p;
  EXPECT_EQ(p.ResolveMtry(10), 4);
  EXPECT_EQ(p.ResolveMtry(1), 1);
  p.mtry = 11;
  EXPECT_THROW(p.Validate(10), ArgumentError);
  p.mtry = 0;
  p.n_trees = 0;
  EXPECT_THROW(p.Validate(10), ArgumentError);
  const ForestParams q = ForestParams::FromJson(nlohmann::json{{"n_trees", 7}, {"min_leaf", 2}});
  EXPECT_EQ(q.n_trees, 7);
  EXPECT_EQ(q.min_leaf, 2);
  EXPECT_EQ(ForestParams::FromJson(q.ToJson()).n_trees, 7);
}

Cohort RandomizedCohort(std::size_t n, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.p = 3;
  spec.prob_plus = 0.5;
  spec.baseline = CovariateFunction::Constant(10.0);
  return GenerateCohort(spec, n, seed);
}

TEST(Propensity, RandomizedMeanNearHalf) {
  const Cohort c = RandomizedCohort(1000, 1);
  const PropensityModel m = FitPropensity(c, ForestParams{}, 2, 0.01);
  double mean = 0.0;
  for (const auto& s : c.subjects) mean += m.ProbPlus(s.covariates);
  mean /= static_cast<double>(c.size());
  EXPECT_GE(mean, 0.45);
  EXPECT_LE(mean, 0.55);
}

TEST(Propensity, DeterministicAssignmentHitsClipBounds) {
  Cohort c = RandomizedCohort(2000, 3);
  for (auto& s : c.subjects) s.treatment = s.covariates[0] > 0 ? Arm::kPlus : Arm::kMinus;
  const double eps = 0.02;
  const PropensityModel m = FitPropensity(c, ForestParams{}, 4, eps);
  const std::vector<double> far_plus{0.95, 0.0, 0.0}, far_minus{-0.95, 0.0, 0.0};
  EXPECT_EQ(m.ProbPlus(far_plus), 1.0 - eps);
  EXPECT_EQ(m.ProbPlus(far_minus), eps);
  const Matrix probe = UniformMatrix(300, 3, 5);
  for (std::size_t i = 0; i < probe.rows(); ++i) {
    const double p = m.ProbPlus(probe.row(i));
    EXPECT_GE(p, eps);
    EXPECT_LE(p, 1.0 - eps);
  }
  for (double p : m.TrainingProbabilities(c)) {
    EXPECT_GE(p, eps);
    EXPECT_LE(p, 1.0 - eps);
  }
}

TEST(Propensity, TableOneStratumShare) {
  const Cohort c = GenerateFromTable(Table1(), 5);
  ForestParams p;
  p.n_trees = 50;
  const PropensityModel m = FitPropensity(c, p, 6);
  const std::vector<double> reduced{1.0};
  EXPECT_NEAR(m.ProbPlus(reduced), 1100.0 / 10100.0, 0.03);
}

TEST(Propensity, SingleArmRejectedAndJsonRoundTrip) {
  Cohort c = RandomizedCohort(50, 7);
  for (auto& s : c.subjects) s.treatment = Arm::kPlus;
  EXPECT_THROW(FitPropensity(c, ForestParams{}, 1), ArgumentError);
  const PropensityModel k = PropensityModel::Constant(0.3);
  const PropensityModel back = PropensityModel::FromJson(k.ToJson());
  const std::vector<double> x{0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(back.ProbOf(Arm::kMinus, x), 0.7);
}

TEST(Importance, PlantedSignalIsLargest) {
  const Matrix x = UniformMatrix(500, 10, 20);
  std::vector<double> y(500);
  for (std::size_t i = 0; i < 500; ++i) y[i] = x(i, 0) > 0 ? 1.0 : -1.0;
  ForestParams p;
  p.n_trees = 100;
  const Forest f = FitForest(x, y, ForestMode::kRegression, p, 1);
  const ImportanceScores s = OobPermutationImportance(f, x, y, 2);
  for (std::size_t j = 1; j < 10; ++j) EXPECT_GT(s.importance[0], s.importance[j]);
  EXPECT_EQ(s.trees_used, 100);
  EXPECT_EQ(OobPermutationImportance(f, x, y, 2).importance, s.importance);
}

TEST(Importance, NullFeatureNearZero) {
  const Matrix x = UniformMatrix(400, 3, 21);
  std::vector<double> y(400);
  for (std::size_t i = 0; i < 400; ++i) y[i] = 5.0 * x(i, 0);
  ForestParams p;
  p.n_trees = 100;
  const Forest f = FitForest(x, y, ForestMode::kRegression, p, 3);
  const ImportanceScores s = OobPermutationImportance(f, x, y, 4);
  for (std::size_t j : {1u, 2u}) {
    EXPECT_LT(std::abs(s.importance[j]), 2.0 * s.se[j] * std::sqrt(s.trees_used))
        << "covariate " << j;
    EXPECT_LT(s.importance[j], 0.05 * s.importance[0]);
  }
}

TEST(Importance, DuplicatedSignalBothPositive) {
  Matrix x = UniformMatrix(400, 4, 22);
  for (std::size_t i = 0; i < 400; ++i) x(i, 1) = x(i, 0);
  std::vector<double> y(400);
  for (std::size_t i = 0; i < 400; ++i) y[i] = 10.0 * x(i, 0);
  ForestParams p;
  p.n_trees = 100;
  const Forest f = FitForest(x, y, ForestMode::kRegression, p, 5);
  const ImportanceScores s = OobPermutationImportance(f, x, y, 6);
  EXPECT_GT(s.importance[0], 0.0);
  EXPECT_GT(s.importance[1], 0.0);
}

Cohort TwoSignalCohort(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.p = 12;
  spec.baseline = CovariateFunction({{Term::Kind::kConstant, 0, 0, 100.0},
                                     {Term::Kind::kLinear, 0, 0, 20.0},
                                     {Term::Kind::kLinear, 1, 0, 20.0}});
  spec.noise_sd = 5.0;
  return GenerateCohort(spec, 300, seed);
}

TEST(SelectTopVariables, PlantedSignalsDeterministic) {
  ForestParams p;
  p.n_trees = 60;
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Cohort c = TwoSignalCohort(seed);
    const VariableSelection s = SelectTopVariables(c, 5, 2, seed, p);
    std::vector<std::string> sel = s.selected;
    std::sort(sel.begin(), sel.end());
    hits += sel == std::vector<std::string>{"x1", "x2"};
    if (seed == 1) {
      const VariableSelection again = SelectTopVariables(c, 5, 2, seed, p);
      EXPECT_EQ(again.selected, s.selected);
      EXPECT_EQ(again.mean_importance, s.mean_importance);
    }
  }
  EXPECT_EQ(hits, 3);
}

TEST(SelectTopVariables, AllCovariatesWhenMEqualsP) {
  ForestParams p;
  p.n_trees = 30;
  const Cohort c = TwoSignalCohort(9);
  const VariableSelection s = SelectTopVariables(c, 3, 12, 1, p);
  ASSERT_EQ(s.selected.size(), 12u);
  EXPECT_EQ(s.fold_rank.size(), 3u);
  for (std::size_t r = 1; r < s.order.size(); ++r) {
    EXPECT_LE(s.mean_rank[s.order[r - 1]], s.mean_rank[s.order[r]]);
  }
  EXPECT_THROW(SelectTopVariables(c, 3, 13, 1, p), ArgumentError);
}

}  // namespace
}  // namespace itr
