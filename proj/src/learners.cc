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

#include "itr/learners.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "itr/errors.h"
#include "itr/random.h"
#include "itr/value.h"

namespace itr {

const char* LearnerName(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kZero:
      return "zero-order";
    case LearnerKind::kRf:
      return "rf";
    case LearnerKind::kRwl:
      return "rwl";
    case LearnerKind::kEarl:
      return "earl";
  }
  return "?";
}

LearnerKind ParseLearner(const std::string& name) {
  if (name == "zero" || name == "zero-order") return LearnerKind::kZero;
  if (name == "rf") return LearnerKind::kRf;
  if (name == "rwl") return LearnerKind::kRwl;
  if (name == "earl") return LearnerKind::kEarl;
  throw ArgumentError("unknown learner '" + name + "' (zero, rf, rwl, earl)");
}

void LearnerConfig::Validate() const {
  if (lambda && !(*lambda > 0.0)) throw ArgumentError("lambda must be > 0");
  if (!lambda) {
    if (lambda_grid.empty()) throw ArgumentError("lambda grid is empty");
    for (double l : lambda_grid) {
      if (!(l > 0.0)) throw ArgumentError("lambda grid values must be > 0");
    }
    if (inner_folds < 2) throw ArgumentError("inner_folds must be >= 2");
  }
  if (max_dc_iterations < 1) throw ArgumentError("max_dc_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw ArgumentError("tolerance must be > 0");
  if (surrogate == Surrogate::kLogistic) {
    throw ArgumentError("surrogate must be ramp-dc or hinge");
  }
}

LearnerConfig LearnerConfig::FromJson(const nlohmann::json& j) {
  LearnerConfig c;
  if (j.contains("surrogate")) {
    const auto s = j.at("surrogate").get<std::string>();
    if (s == "ramp-dc" || s == "ramp") {
      c.surrogate = Surrogate::kRamp;
    } else if (s == "hinge") {
      c.surrogate = Surrogate::kHinge;
    } else {
      throw ArgumentError("unknown surrogate '" + s + "' (ramp-dc, hinge)");
    }
  }
  if (j.contains("lambda") && !j.at("lambda").is_null()) c.lambda = j.at("lambda").get<double>();
  c.lambda_grid = j.value("lambda_grid", c.lambda_grid);
  c.inner_folds = j.value("inner_folds", c.inner_folds);
  c.max_dc_iterations = j.value("max_dc_iterations", c.max_dc_iterations);
  c.tolerance = j.value("tolerance", c.tolerance);
  if (j.contains("outcome_model")) {
    const auto m = j.at("outcome_model").get<std::string>();
    if (m == "regression-forest" || m == "forest") {
      c.outcome_model = OutcomeModelKind::kForest;
    } else if (m == "least-squares" || m == "linear") {
      c.outcome_model = OutcomeModelKind::kLeastSquares;
    } else {
      throw ArgumentError("unknown outcome_model '" + m + "'");
    }
  }
  if (j.contains("outcome_forest")) {
    c.outcome_forest = ForestParams::FromJson(j.at("outcome_forest"), c.outcome_forest);
  }
  if (j.contains("policy_forest")) {
    c.policy_forest = ForestParams::FromJson(j.at("policy_forest"), c.policy_forest);
  }
  if (j.contains("basis")) c.basis = ParseBasis(j.at("basis").get<std::string>());
  c.Validate();
  return c;
}

nlohmann::json LearnerConfig::ToJson() const {
  nlohmann::json j = {
      {"surrogate", surrogate == Surrogate::kRamp ? "ramp-dc" : "hinge"},
      {"lambda", lambda ? nlohmann::json(*lambda) : nlohmann::json(nullptr)},
      {"lambda_grid", lambda_grid},
      {"inner_folds", inner_folds},
      {"max_dc_iterations", max_dc_iterations},
      {"tolerance", tolerance},
      {"outcome_model",
       outcome_model == OutcomeModelKind::kForest ? "regression-forest" : "least-squares"},
      {"outcome_forest", outcome_forest.ToJson()},
      {"policy_forest", policy_forest.ToJson()},
      {"basis", BasisName(basis)}};
  return j;
}

namespace {

std::vector<double> Column(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

std::vector<Arm> Column(std::span<const Arm> v, std::span<const std::size_t> idx) {
  std::vector<Arm> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

// Ordinary least squares with intercept; returns in-sample fitted values
// for `predict_rows` (all rows of x_pred).
std::vector<double> LeastSquaresPredict(const Matrix& x, std::span<const double> y,
                                        const Matrix& x_pred) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols() + 1);
  Eigen::MatrixXd a(n, d);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < d; ++j) {
      a(i, j) = x(static_cast<std::size_t>(i), static_cast<std::size_t>(j - 1));
    }
    b[i] = y[static_cast<std::size_t>(i)];
  }
  // Minimum-norm solution, so collinear designs (e.g. binary strata) still
  // solve and a constant target is reproduced exactly.
  const Eigen::VectorXd beta = a.completeOrthogonalDecomposition().solve(b);
  std::vector<double> out(x_pred.rows());
  for (std::size_t i = 0; i < x_pred.rows(); ++i) {
    double s = beta[0];
    for (std::size_t j = 0; j < x_pred.cols(); ++j) {
      s += beta[static_cast<Eigen::Index>(j + 1)] * x_pred(i, j);
    }
    out[i] = s;
  }
  return out;
}

struct WeightedTask {
  Matrix phi;
  std::vector<double> labels;
  std::vector<double> weights;
  std::vector<double> reward;
  std::vector<Arm> treatment;
  std::vector<double> prob;
};

Arm Decide(const ClassifierFit& fit, std::span<const double> phi) {
  double s = fit.intercept;
  for (std::size_t k = 0; k < phi.size(); ++k) s += fit.weights[k] * phi[k];
  return s > 0.0 ? Arm::kPlus : Arm::kMinus;
}

// Picks lambda by inner cross-validation of the IPW value (ties favour the
// larger penalty), then fits on all rows.
LearnerFit FitWeighted(const WeightedTask& task, std::size_t num_features,
                       Surrogate surrogate, const LearnerConfig& config, std::uint64_t seed) {
  ClassifierOptions opt;
  opt.surrogate = surrogate;
  opt.max_dc_iterations = config.max_dc_iterations;
  opt.tolerance = config.tolerance;
  opt.seed = DeriveSeed(seed, {2});

  LearnerFit out;
  double lambda = config.lambda.value_or(0.0);
  if (!config.lambda) {
    const auto folds = KFoldSplit(task.treatment, config.inner_folds, DeriveSeed(seed, {1}));
    std::vector<double> grid = config.lambda_grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());
    double best = -std::numeric_limits<double>::infinity();
    for (double l : grid) {
      opt.lambda = l;
      double sum = 0.0;
      int used = 0;
      for (int f = 0; f < folds.k(); ++f) {
        const auto train = folds.TrainIndices(f);
        const auto test = folds.TestIndices(f);
        try {
          const auto fit = FitWeightedClassifier(task.phi.SelectRows(train),
                                                 Column(task.labels, train),
                                                 Column(task.weights, train), opt);
          std::vector<Arm> d;
          for (auto i : test) d.push_back(Decide(fit, task.phi.row(i)));
          sum += IpwValue(Column(task.reward, test), Column(task.treatment, test), d,
                          Column(task.prob, test));
          ++used;
        } catch (const DegenerateError&) {
        } catch (const EvaluationError&) {
        }
      }
      if (used > 0 && sum / used > best) {
        best = sum / used;
        lambda = l;
      }
    }
    if (lambda == 0.0) {
      lambda = grid.back();
      out.warnings.push_back("lambda search found no usable inner fold");
    }
  }
  opt.lambda = lambda;
  const auto fit = FitWeightedClassifier(task.phi, task.labels, task.weights, opt);
  LinearRule rule;
  rule.num_features = num_features;
  rule.basis = config.basis;
  rule.weights = fit.weights;
  rule.intercept = fit.intercept;
  rule.tie = Arm::kMinus;
  out.rule = TreatmentRule(std::move(rule));
  out.converged = fit.converged;
  out.iterations = fit.iterations;
  out.lambda = lambda;
  if (!fit.converged) {
    out.warnings.push_back("optimizer stopped at the iteration limit; best iterate returned");
  }
  return out;
}

WeightedTask BaseTask(const Cohort& cohort, const PropensityModel& propensity,
                      const LearnerConfig& config) {
  WeightedTask t;
  t.phi = ExpandBasis(cohort.Covariates(), config.basis);
  t.reward = cohort.Rewards();
  t.treatment = cohort.Treatments();
  t.prob = propensity.TrainingProbabilities(cohort);
  return t;
}

double ScaleOf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

LearnerFit FitZeroOrder(const Cohort& cohort, const PropensityModel& propensity,
                        bool normalized, Arm tie) {
  const auto y = cohort.Rewards();
  const auto a = cohort.Treatments();
  const auto pi = propensity.TrainingProbabilities(cohort);
  std::array<double, 2> values{};
  for (Arm arm : {Arm::kMinus, Arm::kPlus}) {
    const std::vector<Arm> d(cohort.size(), arm);
    values[static_cast<std::size_t>(ArmIndex(arm))] = IpwValue(y, a, d, pi, normalized);
  }
  Arm best = tie;
  if (values[1] > values[0]) best = Arm::kPlus;
  if (values[0] > values[1]) best = Arm::kMinus;
  LearnerFit out;
  out.rule = TreatmentRule::Universal(best);
  out.universal_values = values;
  return out;
}

LearnerFit FitRfPolicy(const Cohort& cohort, const ForestParams& params, std::uint64_t seed) {
  const Matrix x = cohort.Covariates();
  const auto y = cohort.Rewards();
  std::array<Forest, 2> forests;
  for (Arm arm : {Arm::kMinus, Arm::kPlus}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
      if (cohort.subjects[i].treatment == arm) idx.push_back(i);
    }
    if (idx.size() < 2 * static_cast<std::size_t>(params.min_leaf)) {
      throw FitError("rf policy: arm " + std::to_string(ToInt(arm)) + " has " +
                     std::to_string(idx.size()) + " subjects, fewer than 2 * min_leaf");
    }
    const auto k = static_cast<std::size_t>(ArmIndex(arm));
    forests[k] = FitForest(x.SelectRows(idx), Column(y, idx), ForestMode::kRegression, params,
                           DeriveSeed(seed, {k}));
  }
  LearnerFit out;
  out.rule = TreatmentRule(PairedForestRule{forests[0], forests[1], Arm::kMinus});
  return out;
}

std::vector<double> FitMainEffects(const Cohort& cohort, const LearnerConfig& config,
                                   std::uint64_t seed) {
  const Matrix x = cohort.Covariates();
  const auto y = cohort.Rewards();
  if (config.outcome_model == OutcomeModelKind::kLeastSquares) {
    return LeastSquaresPredict(x, y, x);
  }
  const Forest f = FitForest(x, y, ForestMode::kRegression, config.outcome_forest, seed);
  std::vector<double> out;
  for (const auto& p : f.PredictOob(x)) out.push_back(p[0]);
  return out;
}

OutcomePredictions FitOutcomeModels(const Cohort& cohort, const LearnerConfig& config,
                                    std::uint64_t seed) {
  const Matrix x = cohort.Covariates();
  const auto y = cohort.Rewards();
  OutcomePredictions out;
  out.minus.assign(cohort.size(), 0.0);
  out.plus.assign(cohort.size(), 0.0);
  for (Arm arm : {Arm::kMinus, Arm::kPlus}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
      if (cohort.subjects[i].treatment == arm) idx.push_back(i);
    }
    if (idx.empty()) throw FitError("outcome model: arm " + std::to_string(ToInt(arm)) + " is empty");
    auto& target = arm == Arm::kPlus ? out.plus : out.minus;
    const Matrix xa = x.SelectRows(idx);
    const auto ya = Column(y, idx);
    if (config.outcome_model == OutcomeModelKind::kLeastSquares) {
      target = LeastSquaresPredict(xa, ya, x);
      continue;
    }
    const Forest f = FitForest(xa, ya, ForestMode::kRegression, config.outcome_forest,
                               DeriveSeed(seed, {static_cast<std::uint64_t>(ArmIndex(arm))}));
    for (std::size_t i = 0; i < cohort.size(); ++i) target[i] = f.PredictValue(x.row(i));
    const auto oob = f.PredictOob(xa);
    for (std::size_t k = 0; k < idx.size(); ++k) target[idx[k]] = oob[k][0];
  }
  return out;
}

std::vector<double> PseudoContrast(std::span<const double> reward,
                                   std::span<const Arm> treatment,
                                   const OutcomePredictions& mu,
                                   std::span<const double> received_prob) {
  const std::size_t n = reward.size();
  if (treatment.size() != n || mu.minus.size() != n || mu.plus.size() != n ||
      received_prob.size() != n) {
    throw ArgumentError("pseudo-contrast: input lengths differ");
  }
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double own = treatment[i] == Arm::kPlus ? mu.plus[i] : mu.minus[i];
    psi[i] = mu.plus[i] - mu.minus[i] + Sign(treatment[i]) * (reward[i] - own) / received_prob[i];
  }
  return psi;
}

LearnerFit FitRwl(const Cohort& cohort, const PropensityModel& propensity,
                  const LearnerConfig& config, std::uint64_t seed) {
  config.Validate();
  cohort.RequireBothArms("rwl");
  WeightedTask task = BaseTask(cohort, propensity, config);
  const auto m = FitMainEffects(cohort, config, DeriveSeed(seed, Stage::kOutcome));
  const double tiny = 1e-12 * std::max(1.0, ScaleOf(task.reward));
  bool any = false;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    double r = task.reward[i] - m[i];
    if (std::abs(r) <= tiny) r = 0.0;
    any = any || r != 0.0;
    task.weights.push_back(std::abs(r) / task.prob[i]);
    task.labels.push_back(Sign(task.treatment[i]) * (r < 0.0 ? -1.0 : 1.0));
  }
  if (!any) {
    throw DegenerateError("rwl: all residuals are zero; use the zero-order rule instead");
  }
  return FitWeighted(task, cohort.num_covariates(), config.surrogate, config,
                     DeriveSeed(seed, Stage::kLearner));
}

LearnerFit FitEarl(const Cohort& cohort, const PropensityModel& propensity,
                   const LearnerConfig& config, std::uint64_t seed) {
  config.Validate();
  cohort.RequireBothArms("earl");
  WeightedTask task = BaseTask(cohort, propensity, config);
  const auto mu = FitOutcomeModels(cohort, config, DeriveSeed(seed, Stage::kOutcome));
  const auto psi = PseudoContrast(task.reward, task.treatment, mu, task.prob);
  const double tiny = 1e-12 * std::max(1.0, ScaleOf(task.reward));
  bool any = false;
  for (double v : psi) {
    const double c = std::abs(v) <= tiny ? 0.0 : v;
    any = any || c != 0.0;
    task.weights.push_back(std::abs(c));
    task.labels.push_back(c < 0.0 ? -1.0 : 1.0);
  }
  if (!any) throw DegenerateError("earl: all pseudo-contrasts are zero");
  return FitWeighted(task, cohort.num_covariates(), Surrogate::kLogistic, config,
                     DeriveSeed(seed, Stage::kLearner));
}

LearnerFit FitLearner(LearnerKind kind, const Cohort& cohort,
                      const PropensityModel& propensity, const LearnerConfig& config,
                      std::uint64_t seed) {
  switch (kind) {
    case LearnerKind::kZero:
      return FitZeroOrder(cohort, propensity);
    case LearnerKind::kRf:
      cohort.RequireBothArms("rf");
      return FitRfPolicy(cohort, config.policy_forest, seed);
    case LearnerKind::kRwl:
      return FitRwl(cohort, propensity, config, seed);
    case LearnerKind::kEarl:
      return FitEarl(cohort, propensity, config, seed);
  }
  throw ArgumentError("unknown learner");
}

}  // namespace itr
