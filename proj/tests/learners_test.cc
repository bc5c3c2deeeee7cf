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

#include <cmath>
#include <filesystem>

#include "itr/classifier.h"
#include "itr/errors.h"
#include "itr/function.h"
#include "itr/learners.h"
#include "itr/random.h"
#include "itr/rule.h"
#include "itr/strata.h"
#include "itr/synth.h"
#include "itr/value.h"

namespace itr {
namespace {

TEST(CovariateFunction, EvaluatesCatalogue) {
  const CovariateFunction f = CovariateFunction::FromJson(nlohmann::json::parse(R"([
    {"type": "constant", "value": 2},
    {"type": "linear", "index": 0, "scale": 3},
    {"type": "threshold", "index": 1, "cut": 0.5, "scale": 10},
    {"type": "interaction", "i": 0, "j": 1, "scale": 4},
    {"type": "interaction", "i": 0, "j": 1, "scale": 5, "sign": true}
  ])"));
  const std::vector<double> x{-1.0, 1.0};
  EXPECT_DOUBLE_EQ(f(x), 2 - 3 + 10 - 4 - 5);
  EXPECT_EQ(f.MaxIndex(), 1);
  EXPECT_EQ(CovariateFunction::FromJson(f.ToJson()), f);
  EXPECT_DOUBLE_EQ(CovariateFunction::FromJson(7.5)(x), 7.5);
  EXPECT_THROW(CovariateFunction::FromJson(nlohmann::json::parse(R"([{"type": "cubic"}])")),
               SchemaError);
  const std::vector<double> short_x{1.0};
  EXPECT_THROW(f(short_x), ArgumentError);
}

TEST(Rule, ApplyExamples) {
  const std::vector<double> x{2.0, 7.0};
  EXPECT_EQ(TreatmentRule::Universal(Arm::kPlus).Apply(x), Arm::kPlus);
  const TreatmentRule lin(LinearRule{2, Basis::kLinear, {1.0, 0.0}, 0.0, Arm::kMinus});
  EXPECT_EQ(lin.Apply(x), Arm::kPlus);
  const std::vector<double> boundary{0.0, 7.0};
  EXPECT_EQ(lin.Apply(boundary), Arm::kMinus);
  const TreatmentRule lin_plus(LinearRule{2, Basis::kLinear, {1.0, 0.0}, 0.0, Arm::kPlus});
  EXPECT_EQ(lin_plus.Apply(boundary), Arm::kPlus);
  const std::vector<double> wrong{1.0};
  EXPECT_THROW(lin.Apply(wrong), ArgumentError);
}

TEST(Rule, QuadraticBasis) {
  EXPECT_EQ(BasisSize(3, Basis::kLinear), 3u);
  EXPECT_EQ(BasisSize(3, Basis::kQuadratic), 9u);
  const std::vector<double> x{2.0, 3.0, 5.0};
  const auto z = ExpandBasis(x, Basis::kQuadratic);
  EXPECT_EQ(z, (std::vector<double>{2, 3, 5, 6, 10, 15, 4, 9, 25}));
  // sign(x1 * x2) is representable exactly.
  std::vector<double> w(9, 0.0);
  w[3] = 1.0;
  const TreatmentRule r(LinearRule{3, Basis::kQuadratic, w, 0.0, Arm::kMinus});
  const std::vector<double> a{-1, 2, 0}, b{-1, -2, 0};
  EXPECT_EQ(r.Apply(a), Arm::kMinus);
  EXPECT_EQ(r.Apply(b), Arm::kPlus);
  EXPECT_EQ(ParseBasis(BasisName(Basis::kQuadratic)), Basis::kQuadratic);
}

Cohort PlantedCohort(std::size_t n, std::uint64_t seed, double noise = 0.0) {
  // reward = 100 + 50 * 1{x1 > 0, A = +1}
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::normal_distribution<double> eps(0.0, noise > 0 ? noise : 1.0);
  std::bernoulli_distribution arm(0.5);
  Cohort c;
  c.schema = {"x1", "x2", "x3"};
  c.horizon = 1000.0;
  for (std::size_t i = 0; i < n; ++i) {
    Subject s;
    s.id = "s" + std::to_string(i);
    s.covariates = {u(rng), u(rng), u(rng)};
    s.treatment = arm(rng) ? Arm::kPlus : Arm::kMinus;
    double y = 100.0 + (s.covariates[0] > 0 && s.treatment == Arm::kPlus ? 50.0 : 0.0);
    if (noise > 0) y += eps(rng);
    s.reward = y;
    s.time = y;
    s.event = true;
    c.subjects.push_back(s);
  }
  return c;
}

Cohort LinearContrastCohort(std::size_t n, std::uint64_t seed, double noise) {
  // reward = 100 + A * 20 * x1 + noise, so sign(x1) is the unique optimum.
  Cohort c = PlantedCohort(n, seed);
  Rng rng(seed + 1000);
  std::normal_distribution<double> eps(0.0, noise);
  for (auto& s : c.subjects) {
    const double y = 100.0 + static_cast<double>(ToInt(s.treatment)) * 20.0 * s.covariates[0] + eps(rng);
    s.reward = y;
    s.time = y;
  }
  return c;
}

TEST(Rule, JsonRoundTripEveryVariant) {
  const Cohort c = PlantedCohort(100, 1);
  ForestParams p;
  p.n_trees = 5;
  const TreatmentRule forest = FitRfPolicy(c, p, 1).rule;
  std::vector<TreatmentRule> rules{
      TreatmentRule::Universal(Arm::kMinus),
      TreatmentRule(LinearRule{3, Basis::kQuadratic, std::vector<double>(9, 0.25), -0.1, Arm::kPlus}),
      forest,
      TreatmentRule(StratumLookupRule{1, {{{0}, Arm::kMinus}, {{1}, Arm::kPlus}}}),
      TreatmentRule(ContrastRule{CovariateFunction({{Term::Kind::kLinear, 0, 0, 1.0}}), Arm::kMinus}),
  };
  const Matrix x = c.Covariates();
  for (const auto& r : rules) {
    const TreatmentRule back = TreatmentRule::FromJson(nlohmann::json::parse(r.ToJson().dump()));
    EXPECT_EQ(back.kind(), r.kind());
    if (r.kind() == "stratum-lookup") continue;
    EXPECT_EQ(back.ApplyAll(x), r.ApplyAll(x)) << r.kind();
  }
  const std::string path = (std::filesystem::temp_directory_path() / "itr_rule_test.json").string();
  SaveRule(path, forest);
  EXPECT_EQ(LoadRule(path).ApplyAll(x), forest.ApplyAll(x));
  EXPECT_THROW(TreatmentRule::FromJson(nlohmann::json{{"format", "other"}}), Error);
}

TEST(Classifier, RampLossShape) {
  EXPECT_EQ(RampLoss(2.0), 0.0);
  EXPECT_EQ(RampLoss(1.0), 0.0);
  EXPECT_EQ(RampLoss(0.5), 0.5);
  EXPECT_EQ(RampLoss(-3.0), 1.0);
}

struct Labeled {
  Matrix x;
  std::vector<double> y, w;
};

Labeled Separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1, 1), wd(0.5, 2.0);
  Labeled d{Matrix(n, 2), {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    d.x(i, 0) = u(rng);
    d.x(i, 1) = u(rng);
    d.y.push_back(d.x(i, 0) + 0.3 * d.x(i, 1) > 0.1 ? 1.0 : -1.0);
    d.w.push_back(wd(rng));
  }
  return d;
}

double Accuracy(const ClassifierFit& f, const Labeled& d) {
  double ok = 0;
  for (std::size_t i = 0; i < d.x.rows(); ++i) {
    const double m = f.weights[0] * d.x(i, 0) + f.weights[1] * d.x(i, 1) + f.intercept;
    ok += (m > 0 ? 1.0 : -1.0) == d.y[i];
  }
  return ok / static_cast<double>(d.x.rows());
}

TEST(Classifier, SurrogatesSeparateLinearData) {
  const Labeled d = Separable(400, 3);
  for (Surrogate s : {Surrogate::kHinge, Surrogate::kRamp, Surrogate::kLogistic}) {
    ClassifierOptions o;
    o.surrogate = s;
    o.lambda = 1e-3;
    const ClassifierFit f = FitWeightedClassifier(d.x, d.y, d.w, o);
    EXPECT_GE(Accuracy(f, d), 0.97) << static_cast<int>(s);
    EXPECT_TRUE(f.converged);
    EXPECT_GE(f.iterations, 1);
  }
}

TEST(Classifier, RampResistsOutliersBetterThanHinge) {
  Labeled d = Separable(400, 4);
  // Heavy mislabeled points far on the wrong side.
  for (std::size_t i = 0; i < 20; ++i) {
    d.x(i, 0) = 3.0 + 0.01 * static_cast<double>(i);
    d.y[i] = -1.0;
    d.w[i] = 2.0;
  }
  ClassifierOptions o;
  o.lambda = 1e-3;
  o.surrogate = Surrogate::kHinge;
  const ClassifierFit hinge = FitWeightedClassifier(d.x, d.y, d.w, o);
  o.surrogate = Surrogate::kRamp;
  const ClassifierFit ramp = FitWeightedClassifier(d.x, d.y, d.w, o);
  Labeled clean = d;
  clean.x = d.x.SelectRows(std::vector<std::size_t>([] {
    std::vector<std::size_t> v;
    for (std::size_t i = 20; i < 400; ++i) v.push_back(i);
    return v;
  }()));
  clean.y.erase(clean.y.begin(), clean.y.begin() + 20);
  EXPECT_GE(Accuracy(ramp, clean), Accuracy(hinge, clean));
  EXPECT_GE(Accuracy(ramp, clean), 0.95);
  EXPECT_LE(ramp.objective, hinge.objective + 1e-9);
}

TEST(Classifier, WeightScaleInvariance) {
  const Labeled d = Separable(200, 5);
  std::vector<double> w4 = d.w;
  for (auto& v : w4) v *= 4.0;
  ClassifierOptions o;
  o.lambda = 0.01;
  const ClassifierFit a = FitWeightedClassifier(d.x, d.y, d.w, o);
  const ClassifierFit b = FitWeightedClassifier(d.x, d.y, w4, o);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.intercept, b.intercept);
}

TEST(Classifier, InputErrors) {
  const Labeled d = Separable(20, 6);
  ClassifierOptions o;
  o.lambda = 0.0;
  EXPECT_THROW(FitWeightedClassifier(d.x, d.y, d.w, o), ArgumentError);
  o.lambda = 0.1;
  const std::vector<double> zeros(20, 0.0);
  EXPECT_THROW(FitWeightedClassifier(d.x, d.y, zeros, o), DegenerateError);
  std::vector<double> bad = d.y;
  bad[0] = 0.0;
  EXPECT_THROW(FitWeightedClassifier(d.x, bad, d.w, o), ArgumentError);
}

TEST(ZeroOrder, DominantArm) {
  Cohort c = PlantedCohort(300, 2);
  for (auto& s : c.subjects) s.reward = 50.0 + (s.treatment == Arm::kPlus ? 10.0 : 0.0);
  const LearnerFit f = FitZeroOrder(c, PropensityModel::Constant(0.5));
  EXPECT_EQ(f.rule.kind(), "universal");
  EXPECT_EQ(f.rule.Apply(c.subjects[0].covariates), Arm::kPlus);
  ASSERT_TRUE(f.universal_values.has_value());
  EXPECT_DOUBLE_EQ((*f.universal_values)[0], 50.0);
  EXPECT_DOUBLE_EQ((*f.universal_values)[1], 60.0);
}

TEST(ZeroOrder, TiesGoToDefaultArm) {
  Cohort c = PlantedCohort(100, 3);
  for (auto& s : c.subjects) s.reward = 42.0;
  for (Arm tie : {Arm::kMinus, Arm::kPlus}) {
    const LearnerFit f = FitZeroOrder(c, PropensityModel::Constant(0.5), true, tie);
    EXPECT_EQ(f.rule.Apply(c.subjects[0].covariates), tie);
  }
}

TEST(ZeroOrder, TableOneSurvivalFavoursTorsemide) {
  const Cohort c = GenerateFromTable(Table1(), 4);
  ForestParams p;
  p.n_trees = 50;
  const LearnerFit f = FitZeroOrder(c, FitPropensity(c, p, 5));
  const std::vector<double> any{0.0};
  EXPECT_EQ(f.rule.Apply(any), Arm::kPlus);
  EXPECT_NEAR((*f.universal_values)[1], 1.0 - 0.4673, 0.01);
  EXPECT_NEAR((*f.universal_values)[0], 1.0 - 0.5185, 0.01);
}

std::vector<double> Grid1D() {
  std::vector<double> g;
  for (int i = 0; i < 201; ++i) g.push_back(-1.0 + 0.01 * i);
  return g;
}

TEST(RfPolicy, RecoversPlantedInteraction) {
  const Cohort c = LinearContrastCohort(800, 6, 2.0);
  ForestParams p;
  p.n_trees = 100;
  const LearnerFit f = FitRfPolicy(c, p, 7);
  EXPECT_EQ(f.rule.kind(), "paired-forest");
  int agree = 0, total = 0;
  for (double x1 : Grid1D()) {
    if (std::abs(x1) < 0.15) continue;
    for (double x2 : {-0.5, 0.0, 0.5}) {
      const std::vector<double> x{x1, x2, 0.1};
      agree += f.rule.Apply(x) == (x1 > 0 ? Arm::kPlus : Arm::kMinus);
      ++total;
    }
  }
  EXPECT_GE(agree, 0.95 * total);
  const LearnerFit again = FitRfPolicy(c, p, 7);
  EXPECT_EQ(again.rule.ApplyAll(c), f.rule.ApplyAll(c));
}

TEST(RfPolicy, SmallArmRejected) {
  Cohort c = PlantedCohort(100, 8);
  int kept = 0;
  for (auto& s : c.subjects) {
    if (s.treatment == Arm::kPlus && ++kept > 9) s.treatment = Arm::kMinus;
  }
  EXPECT_THROW(FitRfPolicy(c, ForestParams{}, 1), FitError);
}

TEST(Rwl, SeparableResidualSigns) {
  Cohort c = PlantedCohort(400, 9);
  for (auto& s : c.subjects) {
    s.reward = 100.0 + Sign(s.treatment) * (s.covariates[0] > 0 ? 10.0 : -10.0);
  }
  LearnerConfig cfg;
  cfg.outcome_model = OutcomeModelKind::kLeastSquares;
  const LearnerFit f = FitRwl(c, PropensityModel::Constant(0.5), cfg, 10);
  int agree = 0;
  for (const auto& s : c.subjects) {
    agree += f.rule.Apply(s.covariates) == (s.covariates[0] > 0 ? Arm::kPlus : Arm::kMinus);
  }
  EXPECT_GE(agree, 0.98 * c.size());
  EXPECT_TRUE(f.converged);
  EXPECT_GT(f.lambda, 0.0);
}

TEST(Rwl, EqualRewardsAreDegenerate) {
  Cohort c = PlantedCohort(100, 11);
  for (auto& s : c.subjects) s.reward = 5.0;
  LearnerConfig cfg;
  cfg.outcome_model = OutcomeModelKind::kLeastSquares;
  EXPECT_THROW(FitRwl(c, PropensityModel::Constant(0.5), cfg, 1), DegenerateError);
  EXPECT_THROW(FitEarl(c, PropensityModel::Constant(0.5), cfg, 1), DegenerateError);
}

TEST(Rwl, DecisionsInvariantToRewardScale) {
  const Cohort c = PlantedCohort(300, 12, 5.0);
  LearnerConfig cfg;
  cfg.outcome_model = OutcomeModelKind::kLeastSquares;
  cfg.lambda = 0.01;
  const PropensityModel prop = PropensityModel::Constant(0.5);
  const auto base_rwl = FitRwl(c, prop, cfg, 1).rule.ApplyAll(c);
  const auto base_earl = FitEarl(c, prop, cfg, 1).rule.ApplyAll(c);
  for (double scale : {4.0, 0.5}) {
    Cohort s = c;
    for (auto& subj : s.subjects) *subj.reward *= scale;
    EXPECT_EQ(FitRwl(s, prop, cfg, 1).rule.ApplyAll(s), base_rwl) << scale;
    EXPECT_EQ(FitEarl(s, prop, cfg, 1).rule.ApplyAll(s), base_earl) << scale;
  }
}

TEST(Earl, ExactModelsGiveTrueContrast) {
  const Cohort c = PlantedCohort(200, 13);
  OutcomePredictions mu;
  std::vector<double> prob;
  for (const auto& s : c.subjects) {
    mu.minus.push_back(100.0);
    mu.plus.push_back(s.covariates[0] > 0 ? 150.0 : 100.0);
    prob.push_back(0.5);
  }
  const auto psi = PseudoContrast(c.Rewards(), c.Treatments(), mu, prob);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_DOUBLE_EQ(psi[i], c.subjects[i].covariates[0] > 0 ? 50.0 : 0.0);
  }
}

TEST(Earl, RecoversPlantedInteraction) {
  const Cohort c = LinearContrastCohort(600, 14, 5.0);
  LearnerConfig cfg;
  cfg.outcome_forest.n_trees = 50;
  const LearnerFit f = FitEarl(c, PropensityModel::Constant(0.5), cfg, 15);
  int agree = 0, total = 0;
  for (double x1 : Grid1D()) {
    const std::vector<double> x{x1, 0.0, 0.0};
    // Outside a small band around the boundary the rule must match sign(x1).
    if (std::abs(x1) < 0.15) continue;
    agree += f.rule.Apply(x) == (x1 > 0 ? Arm::kPlus : Arm::kMinus);
    ++total;
  }
  EXPECT_GE(agree, 0.95 * total);
}

TEST(Learners, FittedRulesAreDeterministic) {
  const Cohort c = PlantedCohort(300, 16, 5.0);
  LearnerConfig cfg;
  cfg.outcome_forest.n_trees = 30;
  cfg.policy_forest.n_trees = 30;
  const PropensityModel prop = PropensityModel::Constant(0.5);
  for (LearnerKind k : {LearnerKind::kZero, LearnerKind::kRf, LearnerKind::kRwl, LearnerKind::kEarl}) {
    const LearnerFit a = FitLearner(k, c, prop, cfg, 3);
    const LearnerFit b = FitLearner(k, c, prop, cfg, 3);
    const auto da = a.rule.ApplyAll(c);
    EXPECT_EQ(da, b.rule.ApplyAll(c)) << LearnerName(k);
    EXPECT_EQ(da, a.rule.ApplyAll(c)) << LearnerName(k);
  }
}

TEST(LearnerConfig, JsonAndValidation) {
  const LearnerConfig c = LearnerConfig::FromJson(nlohmann::json::parse(
      R"({"surrogate": "hinge", "outcome_model": "least-squares", "lambda": 0.5, "basis": "quadratic"})"));
  EXPECT_EQ(c.surrogate, Surrogate::kHinge);
  EXPECT_EQ(c.outcome_model, OutcomeModelKind::kLeastSquares);
  EXPECT_EQ(*c.lambda, 0.5);
  EXPECT_EQ(c.basis, Basis::kQuadratic);
  const LearnerConfig back = LearnerConfig::FromJson(c.ToJson());
  EXPECT_EQ(back.surrogate, c.surrogate);
  EXPECT_EQ(*back.lambda, 0.5);
  EXPECT_THROW(LearnerConfig::FromJson(nlohmann::json{{"surrogate", "cubic"}}), ArgumentError);
  LearnerConfig bad;
  bad.lambda = -1.0;
  EXPECT_THROW(bad.Validate(), ArgumentError);
  EXPECT_EQ(ParseLearner("zero"), LearnerKind::kZero);
  EXPECT_EQ(ParseLearner("rwl"), LearnerKind::kRwl);
  EXPECT_THROW(ParseLearner("svm"), ArgumentError);
}

}  // namespace
}  // namespace itr
