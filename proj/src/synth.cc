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

#include "itr/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "itr/errors.h"
#include "itr/random.h"

namespace itr {
namespace {

constexpr std::size_t kPilotDraws = 50000;
constexpr std::uint64_t kPilotSeed = 0x5eed0c3a;

double Prevalence(const ScenarioSpec& s, std::size_t j) {
  return s.prevalence.size() == 1 ? s.prevalence.front() : s.prevalence[j];
}

std::vector<double> StratumWeights(const StratifiedTable& t) {
  std::vector<double> w;
  for (const auto& s : t.strata()) w.push_back(static_cast<double>(s.total()));
  return w;
}

double CellRisk(const CellCounts& c) {
  return static_cast<double>(c.died) / static_cast<double>(c.total());
}

// Everything random about one subject, drawn in a fixed order so that
// counterfactual arms share the same draws.
struct Draw {
  std::vector<double> x;
  std::size_t stratum = 0;
  double assign_u = 0.0;
  double outcome_u = 0.0;  // exponential / Bernoulli
  double noise = 0.0;
  double censor_u = 0.0;
};

class Sampler {
 public:
  Sampler(const ScenarioSpec& spec, std::uint64_t seed)
      : spec_(spec), rng_(seed) {
    if (spec.table) {
      const auto w = StratumWeights(*spec.table);
      strata_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }
  }

  Draw Next() {
    Draw d;
    if (spec_.table) {
      d.stratum = strata_(rng_);
      const auto& lv = spec_.table->strata()[d.stratum].levels;
      d.x.assign(lv.begin(), lv.end());
    } else {
      d.x.resize(static_cast<std::size_t>(spec_.p));
      for (std::size_t j = 0; j < d.x.size(); ++j) {
        switch (spec_.law) {
          case CovariateLaw::kUniform:
            d.x[j] = std::uniform_real_distribution<double>(spec_.low, spec_.high)(rng_);
            break;
          case CovariateLaw::kNormal:
            d.x[j] = std::normal_distribution<double>(spec_.mean, spec_.sd)(rng_);
            break;
          case CovariateLaw::kBinary:
            d.x[j] = unit_(rng_) < Prevalence(spec_, j) ? 1.0 : 0.0;
            break;
        }
      }
    }
    d.assign_u = unit_(rng_);
    d.outcome_u = unit_(rng_);
    d.noise = spec_.noise_sd > 0.0 ? std::normal_distribution<double>(0.0, spec_.noise_sd)(rng_)
                                   : 0.0;
    d.censor_u = unit_(rng_);
    return d;
  }

 private:
  const ScenarioSpec& spec_;
  Rng rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::discrete_distribution<std::size_t> strata_;
};

double SurvivalMean(const ScenarioSpec& s, std::span<const double> x, Arm a) {
  const double mu = s.baseline(x) + Sign(a) * s.contrast(x) / 2.0;
  if (!(mu > 0.0)) throw ValueError("survival scenario: non-positive mean event time");
  return mu;
}

double EventTime(const ScenarioSpec& s, const Draw& d, Arm a) {
  return -SurvivalMean(s, d.x, a) * std::log1p(-d.outcome_u);
}

// Uncensored reward of a draw under arm a.
double Outcome(const ScenarioSpec& s, const Draw& d, Arm a) {
  switch (s.mode) {
    case RewardMode::kContinuous:
      return std::max(0.0, s.baseline(d.x) + Sign(a) * s.contrast(d.x) / 2.0 + d.noise);
    case RewardMode::kSurvival: {
      const double t = EventTime(s, d, a);
      return s.horizon ? std::min(t, *s.horizon) : t;
    }
    case RewardMode::kTable: {
      const double risk = CellRisk(s.table->strata()[d.stratum].cell(a));
      return d.outcome_u < risk ? 0.0 : s.reward_scale;
    }
  }
  return 0.0;
}

Arm Assigned(const ScenarioSpec& s, const Draw& d) {
  double p = 0.0;
  if (s.table) {
    const auto& st = s.table->strata()[d.stratum];
    p = static_cast<double>(st.plus.total()) / static_cast<double>(st.total());
  } else {
    p = AssignmentProbability(s, d.x);
  }
  return d.assign_u < p ? Arm::kPlus : Arm::kMinus;
}

MonteCarloValue Summarize(double sum, double sum_sq, std::size_t n) {
  const double m = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - m * m);
  return {m, std::sqrt(var / static_cast<double>(n))};
}

CovariateLaw ParseLaw(const std::string& s) {
  if (s == "uniform") return CovariateLaw::kUniform;
  if (s == "normal") return CovariateLaw::kNormal;
  if (s == "binary") return CovariateLaw::kBinary;
  throw ArgumentError("unknown covariate law '" + s + "'");
}

const char* LawName(CovariateLaw l) {
  switch (l) {
    case CovariateLaw::kUniform:
      return "uniform";
    case CovariateLaw::kNormal:
      return "normal";
    case CovariateLaw::kBinary:
      return "binary";
  }
  return "?";
}

StratifiedTable ResolveTable(const std::string& name) {
  if (name == "table1") return Table1();
  if (name == "table3") return Table3();
  return LoadStratifiedTable(name);
}

}  // namespace

void ScenarioSpec::Validate() const {
  if (table) {
    if (!(reward_scale > 0.0)) throw ArgumentError("reward_scale must be > 0");
    StratumRisks(*table);
    return;
  }
  if (p < 1) throw ArgumentError("p must be >= 1");
  if (law == CovariateLaw::kUniform && !(low < high)) throw ArgumentError("uniform law needs low < high");
  if (law == CovariateLaw::kNormal && !(sd > 0.0)) throw ArgumentError("normal law needs sd > 0");
  if (law == CovariateLaw::kBinary) {
    if (prevalence.size() != 1 && prevalence.size() != static_cast<std::size_t>(p)) {
      throw ArgumentError("prevalence needs 1 or p entries");
    }
    for (double v : prevalence) {
      if (!(v > 0.0 && v < 1.0)) throw ArgumentError("prevalences must be in (0, 1)");
    }
  }
  if (logistic_assignment) {
    if (assign_coefficients.size() != static_cast<std::size_t>(p)) {
      throw ArgumentError("logistic assignment needs p coefficients");
    }
  } else if (!(prob_plus > 0.0 && prob_plus < 1.0)) {
    throw ArgumentError("prob_plus must be in (0, 1)");
  }
  if (baseline.MaxIndex() >= p || contrast.MaxIndex() >= p) {
    throw ArgumentError("reward function references a covariate beyond p");
  }
  if (!(noise_sd >= 0.0)) throw ArgumentError("noise_sd must be >= 0");
  if (mode == RewardMode::kTable) throw ArgumentError("table mode needs a table");
  if (censoring_rate != 0.0) {
    if (mode != RewardMode::kSurvival) throw ArgumentError("censoring needs survival mode");
    if (!(censoring_rate > 0.0 && censoring_rate < 1.0)) {
      throw ArgumentError("censoring rate must be in (0, 1)");
    }
  }
  if (horizon && !(*horizon > 0.0)) throw ArgumentError("horizon must be > 0");
}

ScenarioSpec ScenarioSpec::FromJson(const nlohmann::json& j) {
  ScenarioSpec s;
  try {
    s.name = j.value("name", s.name);
    if (j.contains("tie")) s.tie = ArmFromInt(j.at("tie").get<int>());
    if (j.contains("table")) {
      s.table = ResolveTable(j.at("table").get<std::string>());
      s.mode = RewardMode::kTable;
      s.reward_scale = j.value("reward_scale", 1.0);
      s.p = static_cast<int>(s.table->modifiers().size());
      s.Validate();
      return s;
    }
    s.p = j.at("p").get<int>();
    if (j.contains("covariates")) {
      const auto& c = j.at("covariates");
      s.law = ParseLaw(c.value("law", "uniform"));
      s.low = c.value("low", s.low);
      s.high = c.value("high", s.high);
      s.mean = c.value("mean", s.mean);
      s.sd = c.value("sd", s.sd);
      if (c.contains("prevalence")) {
        const auto& pv = c.at("prevalence");
        s.prevalence = pv.is_array() ? pv.get<std::vector<double>>()
                                     : std::vector<double>{pv.get<double>()};
      }
    }
    if (j.contains("assignment")) {
      const auto& a = j.at("assignment");
      const std::string type = a.value("type", "randomized");
      if (type == "logistic") {
        s.logistic_assignment = true;
        s.assign_intercept = a.value("intercept", 0.0);
        s.assign_coefficients = a.at("coefficients").get<std::vector<double>>();
      } else if (type == "randomized") {
        s.prob_plus = a.value("prob_plus", 0.5);
      } else {
        throw ArgumentError("unknown assignment type '" + type + "'");
      }
    }
    const auto& r = j.at("reward");
    const std::string mode = r.value("mode", "continuous");
    if (mode == "continuous") {
      s.mode = RewardMode::kContinuous;
    } else if (mode == "survival") {
      s.mode = RewardMode::kSurvival;
    } else {
      throw ArgumentError("unknown reward mode '" + mode + "'");
    }
    if (r.contains("baseline")) s.baseline = CovariateFunction::FromJson(r.at("baseline"));
    if (r.contains("contrast")) s.contrast = CovariateFunction::FromJson(r.at("contrast"));
    s.noise_sd = r.value("noise_sd", 0.0);
    if (j.contains("censoring")) {
      const auto& c = j.at("censoring");
      const std::string type = c.value("type", "none");
      if (type == "uniform") {
        s.censoring_rate = c.at("rate").get<double>();
      } else if (type != "none") {
        throw ArgumentError("unknown censoring type '" + type + "'");
      }
    }
    if (j.contains("horizon") && !j.at("horizon").is_null()) s.horizon = j.at("horizon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scenario spec: ") + e.what());
  }
  s.Validate();
  return s;
}

nlohmann::json ScenarioSpec::ToJson() const {
  nlohmann::json j = {{"name", name}, {"tie", ToInt(tie)}};
  if (table) {
    j["table_counts"] = nlohmann::json::array();
    for (std::size_t k = 0; k < table->strata().size(); ++k) {
      const auto& st = table->strata()[k];
      j["table_counts"].push_back({{"stratum", table->StratumName(k)},
                                   {"minus", {st.minus.died, st.minus.alive}},
                                   {"plus", {st.plus.died, st.plus.alive}}});
    }
    j["reward_scale"] = reward_scale;
    return j;
  }
  j["p"] = p;
  nlohmann::json cov = {{"law", LawName(law)}};
  if (law == CovariateLaw::kUniform) cov.update({{"low", low}, {"high", high}});
  if (law == CovariateLaw::kNormal) cov.update({{"mean", mean}, {"sd", sd}});
  if (law == CovariateLaw::kBinary) cov["prevalence"] = prevalence;
  j["covariates"] = cov;
  j["assignment"] = logistic_assignment
                        ? nlohmann::json{{"type", "logistic"},
                                         {"intercept", assign_intercept},
                                         {"coefficients", assign_coefficients}}
                        : nlohmann::json{{"type", "randomized"}, {"prob_plus", prob_plus}};
  j["reward"] = {{"mode", mode == RewardMode::kSurvival ? "survival" : "continuous"},
                 {"baseline", baseline.ToJson()},
                 {"contrast", contrast.ToJson()},
                 {"noise_sd", noise_sd}};
  j["censoring"] = censoring_rate > 0.0
                       ? nlohmann::json{{"type", "uniform"}, {"rate", censoring_rate}}
                       : nlohmann::json{{"type", "none"}};
  j["horizon"] = horizon ? nlohmann::json(*horizon) : nlohmann::json(nullptr);
  return j;
}

ScenarioSpec LoadScenarioSpec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return ScenarioSpec::FromJson(j);
}

ScenarioSpec TableScenario(const StratifiedTable& table, double reward_scale) {
  ScenarioSpec s;
  s.name = "table";
  s.table = table;
  s.mode = RewardMode::kTable;
  s.reward_scale = reward_scale;
  s.p = static_cast<int>(table.modifiers().size());
  s.Validate();
  return s;
}

double AssignmentProbability(const ScenarioSpec& spec, std::span<const double> x) {
  if (!spec.logistic_assignment) return spec.prob_plus;
  double eta = spec.assign_intercept;
  for (std::size_t j = 0; j < x.size(); ++j) eta += spec.assign_coefficients[j] * x[j];
  return 1.0 / (1.0 + std::exp(-eta));
}

double ConditionalMean(const ScenarioSpec& spec, std::span<const double> x, Arm a) {
  switch (spec.mode) {
    case RewardMode::kContinuous:
      return spec.baseline(x) + Sign(a) * spec.contrast(x) / 2.0;
    case RewardMode::kSurvival: {
      const double mu = SurvivalMean(spec, x, a);
      return spec.horizon ? mu * -std::expm1(-*spec.horizon / mu) : mu;
    }
    case RewardMode::kTable: {
      std::vector<int> lv;
      for (double v : x) lv.push_back(static_cast<int>(std::lround(v)));
      const auto& st = spec.table->strata()[spec.table->FindStratum(lv)];
      return spec.reward_scale * (1.0 - CellRisk(st.cell(a)));
    }
  }
  return 0.0;
}

double CensoringUpperBound(const ScenarioSpec& spec) {
  if (spec.mode != RewardMode::kSurvival || spec.censoring_rate <= 0.0) return 0.0;
  // With C ~ U(0, c), P(C < m) = min(1, m / c); the rate is the average of
  // that over pilot draws of m = min(T, horizon).
  Sampler sampler(spec, kPilotSeed);
  std::vector<double> m(kPilotDraws);
  for (auto& v : m) {
    const Draw d = sampler.Next();
    const double t = EventTime(spec, d, Assigned(spec, d));
    v = spec.horizon ? std::min(t, *spec.horizon) : t;
  }
  const auto rate = [&](double c) {
    double s = 0.0;
    for (double v : m) s += std::min(1.0, v / c);
    return s / static_cast<double>(m.size());
  };
  double lo = 0.0, hi = 1.0;
  while (rate(hi) > spec.censoring_rate) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) > spec.censoring_rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Cohort GenerateFromTable(const StratifiedTable& table, std::uint64_t seed, double reward_scale) {
  if (!(reward_scale > 0.0)) throw ArgumentError("reward_scale must be > 0");
  Cohort c;
  c.schema = table.modifiers();
  c.horizon = reward_scale;
  for (const auto& st : table.strata()) {
    const std::vector<double> x(st.levels.begin(), st.levels.end());
    for (Arm a : {Arm::kMinus, Arm::kPlus}) {
      const CellCounts& cell = st.cell(a);
      for (std::int64_t k = 0; k < cell.total(); ++k) {
        Subject s;
        s.covariates = x;
        s.treatment = a;
        const bool died = k < cell.died;
        s.event = died;
        s.time = died ? 0.0 : reward_scale;
        s.reward = s.time;
        c.subjects.push_back(std::move(s));
      }
    }
  }
  Rng rng(seed);
  std::shuffle(c.subjects.begin(), c.subjects.end(), rng);
  for (std::size_t i = 0; i < c.subjects.size(); ++i) c.subjects[i].id = "s" + std::to_string(i + 1);
  return c;
}

Cohort GenerateCohort(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.Validate();
  if (n < 1) throw ArgumentError("n must be >= 1");
  const double c_max = CensoringUpperBound(spec);
  Cohort c;
  if (spec.table) {
    c.schema = spec.table->modifiers();
    c.horizon = spec.reward_scale;
  } else {
    for (int j = 0; j < spec.p; ++j) c.schema.push_back("x" + std::to_string(j + 1));
  }
  Sampler sampler(spec, seed);
  c.subjects.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Draw d = sampler.Next();
    Subject s;
    s.id = "s" + std::to_string(i + 1);
    s.covariates = d.x;
    s.treatment = Assigned(spec, d);
    switch (spec.mode) {
      case RewardMode::kContinuous:
      case RewardMode::kTable:
        s.time = Outcome(spec, d, s.treatment);
        s.event = spec.mode == RewardMode::kContinuous || s.time == 0.0;
        s.reward = s.time;
        break;
      case RewardMode::kSurvival: {
        const double t = EventTime(spec, d, s.treatment);
        const double cens = c_max > 0.0 ? c_max * d.censor_u : t + 1.0;
        s.time = std::min(t, cens);
        s.event = t <= cens;
        break;
      }
    }
    c.subjects.push_back(std::move(s));
  }
  return c;
}

MonteCarloValue TrueValue(const ScenarioSpec& spec, const TreatmentRule& rule, std::size_t mc_n,
                          std::uint64_t seed) {
  spec.Validate();
  if (mc_n < 10000) throw ArgumentError("mc_n must be >= 10^4");
  Sampler sampler(spec, seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < mc_n; ++i) {
    const Draw d = sampler.Next();
    const double y = Outcome(spec, d, rule.Apply(d.x));
    sum += y;
    sum_sq += y * y;
  }
  return Summarize(sum, sum_sq, mc_n);
}

ScenarioTruth ComputeTruth(const ScenarioSpec& spec, std::size_t mc_n, std::uint64_t seed) {
  ScenarioTruth t;
  if (spec.table) {
    StratumLookupRule r;
    r.num_modifiers = spec.table->modifiers().size();
    // Lower risk is the higher-reward arm.
    r.table = StratifiedOptimalRule(*spec.table, spec.tie);
    t.optimal = TreatmentRule(std::move(r));
  } else {
    t.optimal = TreatmentRule(ContrastRule{spec.contrast, spec.tie});
  }
  t.optimal_value = TrueValue(spec, t.optimal, mc_n, seed);
  t.minus_value = TrueValue(spec, TreatmentRule::Universal(Arm::kMinus), mc_n, seed);
  t.plus_value = TrueValue(spec, TreatmentRule::Universal(Arm::kPlus), mc_n, seed);
  return t;
}

Scenario GenerateScenario(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed,
                          std::size_t mc_n) {
  return {GenerateCohort(spec, n, seed), ComputeTruth(spec, mc_n, DeriveSeed(seed, {1}))};
}

}  // namespace itr
