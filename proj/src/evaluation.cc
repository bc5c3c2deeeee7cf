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

#include "itr/evaluation.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "itr/csv.h"
#include "itr/errors.h"
#include "itr/random.h"
#include "itr/value.h"

namespace itr {

void EvaluationOptions::Validate() const {
  if (k < 2) throw ArgumentError("k must be >= 2");
  if (!(clip >= 0.0 && clip < 0.5)) throw ArgumentError("clip must be in [0, 0.5)");
  if (known_propensity && !(*known_propensity > 0.0 && *known_propensity < 1.0)) {
    throw ArgumentError("known propensity must be in (0, 1)");
  }
  rist.Validate();
  learner.Validate();
}

namespace {

constexpr double kZ = 1.96;

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double StdErr(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

[[noreturn]] void FoldFailure(int fold, const char* stage, const std::string& learner,
                              const std::exception& e) {
  std::string msg = "fold " + std::to_string(fold) + ", stage " + stage;
  if (!learner.empty()) msg += ", learner " + learner;
  throw EvaluationError(msg + ": " + e.what());
}

std::string Join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
  return s;
}

}  // namespace

ValueEstimate SummarizeFolds(std::string rule, std::vector<double> fold_values,
                             std::uint64_t fingerprint) {
  if (fold_values.empty()) throw ArgumentError("no fold values");
  ValueEstimate e;
  e.rule = std::move(rule);
  e.point = Mean(fold_values);
  e.se = StdErr(fold_values);
  e.ci_low = e.point - kZ * e.se;
  e.ci_high = e.point + kZ * e.se;
  e.n_folds = static_cast<int>(fold_values.size());
  e.fold_values = std::move(fold_values);
  e.fold_fingerprint = fingerprint;
  return e;
}

EvaluationResult EvaluateFitters(const Cohort& cohort, const std::vector<NamedFitter>& fitters,
                                 const EvaluationOptions& options, std::uint64_t seed) {
  options.Validate();
  if (static_cast<std::size_t>(options.k) > cohort.size()) {
    throw ArgumentError("k exceeds the cohort size");
  }
  if (!cohort.HasCompletedRewards() && !cohort.horizon) {
    throw ArgumentError("cohort needs a horizon or completed rewards");
  }
  EvaluationResult result;
  result.folds = KFoldSplit(cohort, options.k, DeriveSeed(seed, Stage::kFolds));
  std::vector<std::vector<double>> values(fitters.size());

  for (int f = 0; f < options.k; ++f) {
    const auto train_idx = result.folds.TrainIndices(f);
    const auto test_idx = result.folds.TestIndices(f);
    Cohort train = cohort.Subset(train_idx);
    Cohort test = cohort.Subset(test_idx);
    const double censored =
        static_cast<double>(train.CountNeedingImputation()) / static_cast<double>(train.size());

    std::optional<PropensityModel> propensity;
    try {
      train.RequireBothArms("propensity");
      propensity = options.known_propensity
                       ? PropensityModel::Constant(*options.known_propensity, options.clip)
                       : FitPropensity(train, options.propensity_forest,
                                       DeriveSeed(seed, Stage::kPropensity,
                                                  static_cast<std::uint64_t>(f)),
                                       options.clip);
    } catch (const std::exception& e) {
      FoldFailure(f, "propensity", "", e);
    }
    double pmin = 1.0, pmax = 0.0;
    {
      const auto probs = propensity->TrainingProbabilities(train);
      for (std::size_t i = 0; i < train.size(); ++i) {
        const double p = train.subjects[i].treatment == Arm::kPlus ? probs[i] : 1.0 - probs[i];
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
      }
    }

    if (train.CountNeedingImputation() + test.CountNeedingImputation() > 0) {
      try {
        const std::uint64_t s = DeriveSeed(seed, Stage::kImputation, static_cast<std::uint64_t>(f));
        const RistModel model = FitRist(train, options.rist, DeriveSeed(s, {0}));
        ImputationResult done = ImputeCensored(model, train, DeriveSeed(s, {1}));
        train = std::move(done.cohort);
        test = ImputeWithModel(done.final_model, test, DeriveSeed(s, {2}));
      } catch (const std::exception& e) {
        FoldFailure(f, "imputation", "", e);
      }
    }

    const std::uint64_t learner_seed = DeriveSeed(seed, Stage::kLearner, static_cast<std::uint64_t>(f));
    for (std::size_t l = 0; l < fitters.size(); ++l) {
      LearnerFit fit;
      try {
        fit = fitters[l].fit(train, *propensity, learner_seed);
      } catch (const std::exception& e) {
        FoldFailure(f, "fit", fitters[l].name, e);
      }
      double v = 0.0;
      try {
        v = IpwValue(test, fit.rule, *propensity, options.normalized);
      } catch (const std::exception& e) {
        FoldFailure(f, "value", fitters[l].name, e);
      }
      values[l].push_back(v);
      FoldDiagnostics d;
      d.fold = f;
      d.learner = fitters[l].name;
      d.propensity_min = pmin;
      d.propensity_max = pmax;
      d.censored_fraction = censored;
      d.converged = fit.converged;
      d.iterations = fit.iterations;
      d.lambda = fit.lambda;
      d.value = v;
      d.warnings = Join(fit.warnings);
      result.diagnostics.push_back(std::move(d));
    }
  }
  const std::uint64_t fp = result.folds.Fingerprint();
  for (std::size_t l = 0; l < fitters.size(); ++l) {
    result.estimates.push_back(SummarizeFolds(fitters[l].name, std::move(values[l]), fp));
  }
  return result;
}

EvaluationResult EvaluateLearners(const Cohort& cohort, const std::vector<LearnerKind>& learners,
                                  const EvaluationOptions& options, std::uint64_t seed) {
  std::vector<NamedFitter> fitters;
  for (LearnerKind kind : learners) {
    fitters.push_back({LearnerName(kind),
                       [kind, &options](const Cohort& train, const PropensityModel& prop,
                                        std::uint64_t s) {
                         if (kind == LearnerKind::kZero) {
                           return FitZeroOrder(train, prop, options.normalized);
                         }
                         return FitLearner(kind, train, prop, options.learner, s);
                       }});
  }
  return EvaluateFitters(cohort, fitters, options, seed);
}

ValueEstimate CrossValidatedValue(const Cohort& cohort, LearnerKind learner,
                                  const EvaluationOptions& options, std::uint64_t seed) {
  return EvaluateLearners(cohort, {learner}, options, seed).estimates.front();
}

std::vector<ValueEstimate> CompareToZeroOrder(const std::vector<ValueEstimate>& learners,
                                              const ValueEstimate& zero_order) {
  std::vector<ValueEstimate> out;
  for (const auto& e : learners) {
    if (e.n_folds != zero_order.n_folds || e.fold_fingerprint != zero_order.fold_fingerprint ||
        e.fold_values.size() != zero_order.fold_values.size()) {
      throw ArgumentError("estimate '" + e.rule + "' uses a different fold structure");
    }
    std::vector<double> diffs;
    for (std::size_t f = 0; f < e.fold_values.size(); ++f) {
      diffs.push_back(e.fold_values[f] - zero_order.fold_values[f]);
    }
    const double m = Mean(diffs);
    const double se = StdErr(diffs);
    ValueEstimate c = e;
    c.comparator_difference = Difference{m, m - kZ * se, m + kZ * se};
    out.push_back(std::move(c));
  }
  return out;
}

void WriteReportCsv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "rule,reward_type,horizon_days,value,ci_low,ci_high,diff,diff_ci_low,diff_ci_high\n";
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    out << csv::Escape(e.rule) << ',' << csv::Escape(r.reward_type) << ','
        << csv::FormatDouble(r.horizon_days) << ',' << csv::FormatDouble(e.point) << ','
        << csv::FormatDouble(e.ci_low) << ',' << csv::FormatDouble(e.ci_high) << ',';
    if (e.comparator_difference) {
      const auto& d = *e.comparator_difference;
      out << csv::FormatDouble(d.point) << ',' << csv::FormatDouble(d.ci_low) << ','
          << csv::FormatDouble(d.ci_high);
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

void WriteReportText(std::ostream& out, const std::vector<ReportRow>& rows) {
  const auto cell = [](double p, double lo, double hi) {
    return csv::FormatFixed(p, 1) + " (" + csv::FormatFixed(lo, 1) + ", " +
           csv::FormatFixed(hi, 1) + ")";
  };
  std::vector<std::array<std::string, 5>> table;
  table.push_back({"rule", "reward", "horizon", "value (95% CI)", "difference (95% CI)"});
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    table.push_back({e.rule, r.reward_type, csv::FormatDouble(r.horizon_days),
                     cell(e.point, e.ci_low, e.ci_high),
                     e.comparator_difference
                         ? cell(e.comparator_difference->point, e.comparator_difference->ci_low,
                                e.comparator_difference->ci_high)
                         : "-"});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : table) {
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < 5; ++c) {
      std::string v = row[c];
      v.resize(width[c], ' ');
      line += (c ? "  " : "") + v;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
}

void WriteDiagnosticsHeader(std::ostream& out) {
  out << "reward_type,horizon_days,fold,learner,propensity_min,propensity_max,"
         "censored_fraction,converged,iterations,lambda,value,warnings\n";
}

void WriteDiagnosticsCsv(std::ostream& out, const std::vector<FoldDiagnostics>& diagnostics,
                         const std::string& reward_type, double horizon_days) {
  for (const auto& d : diagnostics) {
    out << csv::Escape(reward_type) << ',' << csv::FormatDouble(horizon_days) << ',' << d.fold
        << ',' << csv::Escape(d.learner) << ',' << csv::FormatDouble(d.propensity_min) << ','
        << csv::FormatDouble(d.propensity_max) << ',' << csv::FormatDouble(d.censored_fraction)
        << ',' << (d.converged ? "true" : "false") << ',' << d.iterations << ','
        << csv::FormatDouble(d.lambda) << ',' << csv::FormatDouble(d.value) << ','
        << csv::Escape(d.warnings) << '\n';
  }
}

}  // namespace itr
