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

#include "itr/cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "itr/csv.h"
#include "itr/errors.h"
#include "itr/importance.h"
#include "itr/random.h"
#include "itr/rule.h"
#include "itr/synth.h"

namespace itr::cli {
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::Validate(bool check_input) const {
  if (k < 2) throw ArgumentError("k must be >= 2, got " + std::to_string(k));
  if (horizons.empty()) throw ArgumentError("at least one horizon is required");
  for (double h : horizons) {
    if (!(h > 0.0)) throw ArgumentError("horizons must be > 0");
  }
  if (select_variables) {
    if (top_m < 1) throw ArgumentError("top_m must be >= 1");
    if (selection_folds < 2) throw ArgumentError("selection_folds must be >= 2");
  }
  if (out.empty()) throw ArgumentError("output directory is empty");
  Evaluation().Validate();
  if (check_input) {
    if (input.empty()) throw ArgumentError("no input cohort given");
    if (!fs::exists(input)) throw InputError("file not found: " + input);
  }
}

RunConfig RunConfig::FromJson(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.input = j.value("input", c.input);
    if (j.contains("schema")) c.schema = SchemaConfig::FromJson(j.at("schema"));
    if (j.contains("outcomes")) {
      for (const auto& o : j.at("outcomes")) {
        c.outcomes.push_back({o.at("name").get<std::string>(),
                              o.at("time_column").get<std::string>(),
                              o.at("event_column").get<std::string>()});
      }
    }
    if (j.contains("horizons")) c.horizons = j.at("horizons").get<std::vector<double>>();
    if (j.contains("learners")) {
      c.learners.clear();
      for (const auto& name : j.at("learners").get<std::vector<std::string>>()) {
        const LearnerKind kind = ParseLearner(name);
        if (kind != LearnerKind::kZero) c.learners.push_back(kind);
      }
    }
    c.k = j.value("k", c.k);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.normalized = j.value("normalized", c.normalized);
    c.clip = j.value("clip", c.clip);
    if (j.contains("known_propensity") && !j.at("known_propensity").is_null()) {
      c.known_propensity = j.at("known_propensity").get<double>();
    }
    c.select_variables = j.value("select_variables", c.select_variables);
    c.top_m = j.value("top_m", c.top_m);
    c.selection_folds = j.value("selection_folds", c.selection_folds);
    if (j.contains("importance_forest")) {
      c.importance_forest = ForestParams::FromJson(j.at("importance_forest"), c.importance_forest);
    }
    if (j.contains("propensity_forest")) {
      c.propensity_forest = ForestParams::FromJson(j.at("propensity_forest"), c.propensity_forest);
    }
    if (j.contains("rist")) c.rist = RistParams::FromJson(j.at("rist"), c.rist);
    if (j.contains("learner")) c.learner = LearnerConfig::FromJson(j.at("learner"));
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("run config: ") + e.what());
  }
  return c;
}

nlohmann::json RunConfig::ToJson() const {
  nlohmann::json outcomes_json = nlohmann::json::array();
  for (const auto& o : outcomes) {
    outcomes_json.push_back(
        {{"name", o.name}, {"time_column", o.time_column}, {"event_column", o.event_column}});
  }
  std::vector<std::string> names;
  for (auto kind : learners) names.emplace_back(LearnerName(kind));
  return {{"input", input},
          {"schema", schema.ToJson()},
          {"outcomes", outcomes_json},
          {"horizons", horizons},
          {"learners", names},
          {"k", k},
          {"seed", seed},
          {"out", out},
          {"normalized", normalized},
          {"clip", clip},
          {"known_propensity",
           known_propensity ? nlohmann::json(*known_propensity) : nlohmann::json(nullptr)},
          {"select_variables", select_variables},
          {"top_m", top_m},
          {"selection_folds", selection_folds},
          {"importance_forest", importance_forest.ToJson()},
          {"propensity_forest", propensity_forest.ToJson()},
          {"rist", rist.ToJson()},
          {"learner", learner.ToJson()}};
}

EvaluationOptions RunConfig::Evaluation() const {
  EvaluationOptions o;
  o.k = k;
  o.normalized = normalized;
  o.clip = clip;
  o.known_propensity = known_propensity;
  o.propensity_forest = propensity_forest;
  o.rist = rist;
  o.learner = learner;
  return o;
}

std::vector<OutcomeColumns> RunConfig::ResolvedOutcomes() const {
  if (!outcomes.empty()) return outcomes;
  return {{"outcome", schema.time_column, schema.event_column}};
}

SchemaConfig RunConfig::SchemaFor(const OutcomeColumns& outcome) const {
  SchemaConfig s = schema;
  s.time_column = outcome.time_column;
  s.event_column = outcome.event_column;
  for (const auto& o : ResolvedOutcomes()) {
    s.ignore_columns.push_back(o.time_column);
    s.ignore_columns.push_back(o.event_column);
  }
  return s;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return RunConfig::FromJson(j);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string Pad(std::string s, std::size_t w) {
  if (s.size() < w) s.resize(w, ' ');
  return s;
}

void WriteRows(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += (c ? "  " : "") + (c + 1 < r.size() ? Pad(r[c], width[c]) : r[c]);
    }
    out << line << '\n';
  }
}

std::string Risk(double v) { return csv::FormatFixed(v, 4); }

std::string Slug(const std::string& s) {
  std::string o = s;
  std::replace(o.begin(), o.end(), ' ', '_');
  return o;
}

}  // namespace

void WriteToyReport(std::ostream& out, const StratifiedTable& table, const std::string& title) {
  const RiskSummary risks = StratumRisks(table);
  const std::string minus = Slug(table.arm_label(Arm::kMinus));
  const std::string plus = Slug(table.arm_label(Arm::kPlus));
  out << "table: " << title << '\n';
  out << "arm -1: " << minus << '\n';
  out << "arm +1: " << plus << "\n\n";

  std::vector<std::vector<std::string>> rows{{"stratum_risk", minus, plus, "overall"}};
  for (const auto& s : risks.strata) {
    rows.push_back({s.name, Risk(s.minus), Risk(s.plus), Risk(s.pooled)});
  }
  rows.push_back({"all", Risk(risks.crude_minus), Risk(risks.crude_plus), Risk(risks.overall)});
  WriteRows(out, rows);

  const StratumRule tailored = StratifiedOptimalRule(table);
  out << '\n';
  WriteRows(out, {{"standardized_risk", "risk"},
                  {"everyone_" + minus,
                   Risk(StandardizedRisk(table, UniversalStratumRule(table, Arm::kMinus)))},
                  {"everyone_" + plus,
                   Risk(StandardizedRisk(table, UniversalStratumRule(table, Arm::kPlus)))},
                  {"tailored", Risk(StandardizedRisk(table, tailored))}});

  out << '\n';
  std::vector<std::vector<std::string>> rule_rows{{"tailored_rule", "arm"}};
  for (std::size_t k = 0; k < table.strata().size(); ++k) {
    const Arm a = tailored.at(table.strata()[k].levels);
    rule_rows.push_back({table.StratumName(k), Slug(table.arm_label(a))});
  }
  WriteRows(out, rule_rows);
}

namespace {

void WriteImportance(const fs::path& dir, const VariableSelection& sel,
                     std::vector<std::string>& files) {
  {
    std::ofstream out(dir / "importance.csv");
    if (!out) throw InputError("cannot write " + (dir / "importance.csv").string());
    out << "covariate,fold,importance,se,rank\n";
    const std::size_t k = sel.fold_importance.size();
    for (std::size_t f = 0; f < k; ++f) {
      for (std::size_t j = 0; j < sel.names.size(); ++j) {
        out << csv::Escape(sel.names[j]) << ',' << f << ','
            << csv::FormatDouble(sel.fold_importance[f][j]) << ','
            << csv::FormatDouble(sel.fold_se[f][j]) << ',' << sel.fold_rank[f][j] << '\n';
      }
    }
    for (std::size_t j = 0; j < sel.names.size(); ++j) {
      double ss = 0.0;
      for (std::size_t f = 0; f < k; ++f) {
        const double d = sel.fold_importance[f][j] - sel.mean_importance[j];
        ss += d * d;
      }
      const double se = k > 1 ? std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k)) : 0.0;
      out << csv::Escape(sel.names[j]) << ",mean," << csv::FormatDouble(sel.mean_importance[j])
          << ',' << csv::FormatDouble(se) << ',' << csv::FormatDouble(sel.mean_rank[j]) << '\n';
    }
    files.push_back("importance.csv");
  }
  std::ofstream out(dir / "selected_variables.csv");
  if (!out) throw InputError("cannot write " + (dir / "selected_variables.csv").string());
  out << "rank,covariate,mean_rank,mean_importance,selected\n";
  const std::set<std::string> chosen(sel.selected.begin(), sel.selected.end());
  for (std::size_t r = 0; r < sel.order.size(); ++r) {
    const std::size_t j = sel.order[r];
    out << r + 1 << ',' << csv::Escape(sel.names[j]) << ',' << csv::FormatDouble(sel.mean_rank[j])
        << ',' << csv::FormatDouble(sel.mean_importance[j]) << ','
        << (chosen.count(sel.names[j]) ? "true" : "false") << '\n';
  }
  files.push_back("selected_variables.csv");
}

Cohort CompleteAtHorizon(const Cohort& cohort, double horizon, const RistParams& rist,
                         std::uint64_t seed) {
  Cohort restricted = RestrictHorizon(cohort, horizon);
  if (restricted.CountNeedingImputation() == 0) return restricted;
  return FitAndImpute(restricted, rist, seed).cohort;
}

void WriteManifest(const fs::path& dir, const std::string& command, const RunConfig& config,
                   std::vector<std::string> files) {
  files.push_back("manifest.json");
  nlohmann::json m = {{"tool", "itr"},
                      {"version", kVersion},
                      {"command", command},
                      {"seed", config.seed},
                      {"seed_streams",
                       {{"folds", DeriveSeed(config.seed, Stage::kFolds)},
                        {"selection", DeriveSeed(config.seed, Stage::kSelection)}}},
                      {"config", config.ToJson()},
                      {"outputs", files}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw InputError("cannot write manifest");
  out << m.dump(2) << '\n';
}

VariableSelection RunSelection(const RunConfig& config, std::ostream& log) {
  const auto outcomes = config.ResolvedOutcomes();
  const Cohort primary = LoadCohort(config.input, config.SchemaFor(outcomes.front()));
  const double h = *std::max_element(config.horizons.begin(), config.horizons.end());
  log << "[itr] selection: outcome " << outcomes.front().name << ", horizon "
      << csv::FormatDouble(h) << ", " << primary.num_covariates() << " covariates\n";
  const Cohort completed =
      CompleteAtHorizon(primary, h, config.rist, DeriveSeed(config.seed, Stage::kSelection, 1));
  const int m = std::min<int>(config.top_m, static_cast<int>(primary.num_covariates()));
  return SelectTopVariables(completed, config.selection_folds, m, config.seed,
                            config.importance_forest);
}

}  // namespace

PipelineResult RunPipeline(const RunConfig& config, std::ostream& log) {
  config.Validate();
  const fs::path dir(config.out);
  fs::create_directories(dir);
  PipelineResult result;

  std::optional<VariableSelection> selection;
  if (config.select_variables) {
    try {
      selection = RunSelection(config, log);
    } catch (const Error& e) {
      throw EvaluationError(std::string("stage selection: ") + e.what());
    }
    result.selected = selection->selected;
    WriteImportance(dir, *selection, result.files);
  }

  std::ofstream diag(dir / "diagnostics.csv");
  if (!diag) throw InputError("cannot write diagnostics.csv");
  WriteDiagnosticsHeader(diag);

  std::vector<LearnerKind> kinds{LearnerKind::kZero};
  kinds.insert(kinds.end(), config.learners.begin(), config.learners.end());
  const EvaluationOptions options = config.Evaluation();
  for (const auto& outcome : config.ResolvedOutcomes()) {
    Cohort cohort = LoadCohort(config.input, config.SchemaFor(outcome));
    if (selection) cohort = cohort.SelectCovariates(selection->selected);
    for (double h : config.horizons) {
      log << "[itr] evaluate: outcome " << outcome.name << ", horizon " << csv::FormatDouble(h)
          << ", n = " << cohort.size() << '\n';
      const Cohort restricted = RestrictHorizon(cohort, h);
      EvaluationResult ev;
      try {
        ev = EvaluateLearners(restricted, kinds, options, config.seed);
      } catch (const Error& e) {
        throw EvaluationError("outcome " + outcome.name + ", horizon " + csv::FormatDouble(h) +
                              ": " + e.what());
      }
      const auto compared = CompareToZeroOrder(
          std::vector<ValueEstimate>(ev.estimates.begin() + 1, ev.estimates.end()),
          ev.estimates.front());
      result.rows.push_back({outcome.name, h, ev.estimates.front()});
      for (const auto& e : compared) result.rows.push_back({outcome.name, h, e});
      WriteDiagnosticsCsv(diag, ev.diagnostics, outcome.name, h);
    }
  }
  diag.close();
  result.files.push_back("diagnostics.csv");

  {
    std::ofstream out(dir / "report.csv");
    if (!out) throw InputError("cannot write report.csv");
    WriteReportCsv(out, result.rows);
    result.files.push_back("report.csv");
  }
  {
    std::ofstream out(dir / "report.txt");
    if (!out) throw InputError("cannot write report.txt");
    WriteReportText(out, result.rows);
    result.files.push_back("report.txt");
  }
  WriteManifest(dir, config.select_variables ? "pipeline" : "evaluate", config, result.files);
  result.files.push_back("manifest.json");
  return result;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string out;
  std::string config_path;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

RunConfig BaseConfig(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : LoadRunConfig(g.config_path);
  if (g.seed_opt->count()) c.seed = g.seed;
  if (g.out_opt->count()) c.out = g.out;
  return c;
}

Cohort LoadInput(const RunConfig& c) {
  if (c.input.empty()) throw ArgumentError("--input is required");
  return LoadCohort(c.input, c.SchemaFor(c.ResolvedOutcomes().front()));
}

PropensityModel PropensityFor(const RunConfig& c, const Cohort& cohort) {
  if (c.known_propensity) return PropensityModel::Constant(*c.known_propensity, c.clip);
  return FitPropensity(cohort, c.propensity_forest, DeriveSeed(c.seed, Stage::kPropensity), c.clip);
}

StratifiedTable ResolveToyTable(const std::string& name) {
  if (name == "table1") return Table1();
  if (name == "table3") return Table3();
  return LoadStratifiedTable(name);
}

void WriteTruth(const std::string& path, const ScenarioTruth& t, std::size_t mc_n) {
  const auto mc = [](const MonteCarloValue& v) {
    return nlohmann::json{{"value", v.value}, {"mc_se", v.se}};
  };
  nlohmann::json j = {{"mc_n", mc_n},
                      {"optimal_rule", t.optimal.ToJson()},
                      {"optimal", mc(t.optimal_value)},
                      {"universal_minus", mc(t.minus_value)},
                      {"universal_plus", mc(t.plus_value)}};
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Individualized treatment rules from censored outcome data"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "Master random seed");
  g.out_opt = app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--config", g.config_path, "Run configuration (JSON)");

  std::function<void()> action;

  // toy
  auto* toy = app.add_subcommand("toy", "Stratified toy tables: risks and tailored rule");
  std::string toy_table;
  toy->add_option("table", toy_table, "table1, table3 or a CSV path")->required();
  toy->callback([&] {
    action = [&] {
      const StratifiedTable t = ResolveToyTable(toy_table);
      std::ostringstream report;
      WriteToyReport(report, t, toy_table);
      out << report.str();
      if (g.out_opt->count()) {
        std::ofstream f(g.out);
        if (!f) throw InputError("cannot write " + g.out);
        f << report.str();
      }
    };
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic cohort");
  std::string spec_path, table_name, truth_path;
  std::size_t sim_n = 0, mc_n = 1000000;
  double reward_scale = 1.0;
  sim->add_option("--spec", spec_path, "Scenario spec (JSON)");
  sim->add_option("--table", table_name, "Exact reconstruction of table1/table3 or a table CSV");
  sim->add_option("--reward-scale", reward_scale, "Survivor reward for --table (1 or 365)");
  sim->add_option("--n", sim_n, "Number of subjects (spec mode)");
  sim->add_option("--truth", truth_path, "Write oracle values (JSON)");
  sim->add_option("--mc-n", mc_n, "Monte Carlo draws for --truth");
  sim->callback([&] {
    action = [&] {
      const RunConfig c = BaseConfig(g);
      const std::string path = g.out_opt->count() ? g.out : "cohort.csv";
      Cohort cohort;
      if (!table_name.empty() == !spec_path.empty()) {
        throw ArgumentError("give exactly one of --spec or --table");
      }
      std::optional<ScenarioSpec> spec;
      if (!table_name.empty()) {
        const StratifiedTable t = ResolveToyTable(table_name);
        spec = TableScenario(t, reward_scale);
        cohort = GenerateFromTable(t, c.seed, reward_scale);
      } else {
        if (sim_n < 1) throw ArgumentError("--n must be >= 1");
        spec = LoadScenarioSpec(spec_path);
        cohort = GenerateCohort(*spec, sim_n, c.seed);
      }
      SaveCohort(path, cohort, c.schema);
      out << "wrote " << cohort.size() << " subjects to " << path << '\n';
      if (!truth_path.empty()) {
        WriteTruth(truth_path, ComputeTruth(*spec, mc_n, DeriveSeed(c.seed, {1})), mc_n);
        out << "wrote oracle values to " << truth_path << '\n';
      }
    };
  });

  // impute
  auto* imp = app.add_subcommand("impute", "Impute censored event times up to a horizon");
  std::string input;
  double horizon = 0.0;
  int cycles = 0, trees = 0;
  imp->add_option("--input", input, "Cohort CSV")->required();
  imp->add_option("--horizon", horizon, "Horizon in days")->required();
  imp->add_option("--cycles", cycles, "Imputation cycles");
  imp->add_option("--trees", trees, "Survival trees per fit");
  imp->callback([&] {
    action = [&] {
      RunConfig c = BaseConfig(g);
      c.input = input;
      if (cycles) c.rist.n_imputation_cycles = cycles;
      if (trees) c.rist.n_trees = trees;
      c.rist.Validate();
      const std::string path = g.out_opt->count() ? g.out : "completed.csv";
      const Cohort cohort = LoadInput(c);
      const Cohort restricted = RestrictHorizon(cohort, horizon);
      const std::size_t flagged = restricted.CountNeedingImputation();
      const Cohort done =
          flagged ? FitAndImpute(restricted, c.rist, DeriveSeed(c.seed, Stage::kImputation)).cohort
                  : restricted;
      SaveCohort(path, done, c.SchemaFor(c.ResolvedOutcomes().front()));
      out << "imputed " << flagged << " of " << cohort.size() << " subjects; wrote " << path
          << '\n';
    };
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit one treatment rule on a whole cohort");
  std::string learner_name = "rwl";
  std::optional<double> known_p;
  fit->add_option("--input", input, "Cohort CSV")->required();
  fit->add_option("--learner", learner_name, "zero, rf, rwl or earl");
  fit->add_option("--horizon", horizon, "Horizon in days")->required();
  fit->add_option("--known-propensity", known_p, "Randomization probability of arm +1");
  fit->callback([&] {
    action = [&] {
      RunConfig c = BaseConfig(g);
      c.input = input;
      if (known_p) c.known_propensity = known_p;
      const LearnerKind kind = ParseLearner(learner_name);
      const std::string path = g.out_opt->count() ? g.out : "rule.json";
      const Cohort completed = CompleteAtHorizon(LoadInput(c), horizon, c.rist,
                                                 DeriveSeed(c.seed, Stage::kImputation));
      const PropensityModel prop = PropensityFor(c, completed);
      const LearnerFit f = FitLearner(kind, completed, prop, c.learner,
                                      DeriveSeed(c.seed, Stage::kLearner));
      SaveRule(path, f.rule);
      out << "learner " << LearnerName(kind) << ": " << f.rule.kind() << " rule";
      if (kind == LearnerKind::kRwl || kind == LearnerKind::kEarl) {
        out << ", lambda " << csv::FormatDouble(f.lambda) << ", "
            << (f.converged ? "converged" : "not converged");
      }
      out << "; wrote " << path << '\n';
      for (const auto& w : f.warnings) err << "warning: " << w << '\n';
    };
  });

  // importance
  auto* impc = app.add_subcommand("importance", "Cross-validated permutation importance ranking");
  int k_opt = 0, m_opt = 0;
  impc->add_option("--input", input, "Cohort CSV")->required();
  impc->add_option("--horizon", horizon, "Horizon in days")->required();
  impc->add_option("--k", k_opt, "Folds");
  impc->add_option("--m", m_opt, "Number of covariates to keep");
  impc->callback([&] {
    action = [&] {
      RunConfig c = BaseConfig(g);
      c.input = input;
      c.horizons = {horizon};
      if (k_opt) c.selection_folds = k_opt;
      if (m_opt) c.top_m = m_opt;
      c.select_variables = true;
      c.Validate();
      const fs::path dir(c.out);
      fs::create_directories(dir);
      const VariableSelection sel = RunSelection(c, err);
      std::vector<std::string> files;
      WriteImportance(dir, sel, files);
      WriteManifest(dir, "importance", c, files);
      out << "selected:";
      for (const auto& s : sel.selected) out << ' ' << s;
      out << "\nwrote " << (dir / "importance.csv").string() << '\n';
    };
  });

  // evaluate / pipeline
  std::vector<double> horizons;
  std::vector<std::string> learner_names;
  auto add_eval_options = [&](CLI::App* sub) {
    sub->add_option("--input", input, "Cohort CSV");
    sub->add_option("--horizon", horizons, "Horizons in days (repeatable)");
    sub->add_option("--learners", learner_names, "Learners among rf, rwl, earl")->delimiter(',');
    sub->add_option("--k", k_opt, "Cross-validation folds");
    sub->add_option("--known-propensity", known_p, "Randomization probability of arm +1");
  };
  auto eval_config = [&] {
    RunConfig c = BaseConfig(g);
    if (!input.empty()) c.input = input;
    if (!horizons.empty()) c.horizons = horizons;
    if (!learner_names.empty()) {
      c.learners.clear();
      for (const auto& n : learner_names) {
        const LearnerKind kind = ParseLearner(n);
        if (kind != LearnerKind::kZero) c.learners.push_back(kind);
      }
    }
    if (k_opt) c.k = k_opt;
    if (known_p) c.known_propensity = known_p;
    return c;
  };
  auto print_result = [&](const RunConfig& c, const PipelineResult& r) {
    WriteReportText(out, r.rows);
    out << "wrote";
    for (const auto& f : r.files) out << ' ' << (fs::path(c.out) / f).string();
    out << '\n';
  };

  auto* eval = app.add_subcommand("evaluate", "Cross-validated values of each learner");
  add_eval_options(eval);
  eval->callback([&] {
    action = [&] {
      RunConfig c = eval_config();
      c.select_variables = false;
      print_result(c, RunPipeline(c, err));
    };
  });

  auto* pipe = app.add_subcommand("pipeline", "Variable selection, evaluation and report");
  add_eval_options(pipe);
  bool no_select = false;
  pipe->add_flag("--no-select", no_select, "Skip variable selection");
  pipe->callback([&] {
    action = [&] {
      RunConfig c = eval_config();
      if (no_select) c.select_variables = false;
      print_result(c, RunPipeline(c, err));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    if (action) action();
    return 0;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace itr::cli
