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

#include "itr/cohort.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "itr/csv.h"
#include "itr/errors.h"
#include "itr/random.h"

namespace itr {

Arm ArmFromInt(int v) {
  if (v == -1) return Arm::kMinus;
  if (v == 1) return Arm::kPlus;
  throw ValueError("treatment must be -1 or +1, got " + std::to_string(v));
}

Matrix Cohort::Covariates() const {
  Matrix m(subjects.size(), schema.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    std::copy(subjects[i].covariates.begin(), subjects[i].covariates.end(),
              m.row(i).begin());
  }
  return m;
}

std::vector<Arm> Cohort::Treatments() const {
  std::vector<Arm> a;
  a.reserve(subjects.size());
  for (const auto& s : subjects) a.push_back(s.treatment);
  return a;
}

bool Cohort::HasCompletedRewards() const {
  return std::all_of(subjects.begin(), subjects.end(), [](const Subject& s) {
    return s.reward.has_value() && !s.needs_imputation;
  });
}

std::vector<double> Cohort::Rewards() const {
  std::vector<double> y;
  y.reserve(subjects.size());
  for (const auto& s : subjects) {
    if (!s.reward || s.needs_imputation) {
      throw ArgumentError("subject " + s.id +
                          " has no completed reward (restrict the horizon and "
                          "impute censored subjects first)");
    }
    y.push_back(*s.reward);
  }
  return y;
}

std::size_t Cohort::CountArm(Arm a) const {
  return static_cast<std::size_t>(
      std::count_if(subjects.begin(), subjects.end(),
                    [a](const Subject& s) { return s.treatment == a; }));
}

std::size_t Cohort::CountNeedingImputation() const {
  return static_cast<std::size_t>(
      std::count_if(subjects.begin(), subjects.end(),
                    [](const Subject& s) { return s.needs_imputation; }));
}

Cohort Cohort::Subset(std::span<const std::size_t> indices) const {
  Cohort out;
  out.schema = schema;
  out.horizon = horizon;
  out.subjects.reserve(indices.size());
  for (std::size_t i : indices) out.subjects.push_back(subjects.at(i));
  return out;
}

Cohort Cohort::SelectCovariates(const std::vector<std::string>& names) const {
  std::vector<std::size_t> cols;
  for (const auto& n : names) {
    auto it = std::find(schema.begin(), schema.end(), n);
    if (it == schema.end()) throw SchemaError("unknown covariate: " + n);
    cols.push_back(static_cast<std::size_t>(it - schema.begin()));
  }
  Cohort out;
  out.schema = names;
  out.horizon = horizon;
  out.subjects = subjects;
  for (auto& s : out.subjects) {
    std::vector<double> x;
    x.reserve(cols.size());
    for (std::size_t c : cols) x.push_back(s.covariates[c]);
    s.covariates = std::move(x);
  }
  return out;
}

void Cohort::Validate() const {
  for (const auto& s : subjects) {
    if (s.covariates.size() != schema.size()) {
      throw ArgumentError("subject " + s.id + " has " +
                          std::to_string(s.covariates.size()) +
                          " covariates, schema has " +
                          std::to_string(schema.size()));
    }
    if (!(s.time >= 0.0) || !std::isfinite(s.time)) {
      throw ArgumentError("subject " + s.id + " has negative or invalid time");
    }
    if (s.reward) {
      if (*s.reward < 0.0 || (horizon && *s.reward > *horizon)) {
        throw ArgumentError("subject " + s.id + " has reward outside [0, horizon]");
      }
    }
  }
}

void Cohort::RequireBothArms(const char* what) const {
  if (CountArm(Arm::kMinus) == 0 || CountArm(Arm::kPlus) == 0) {
    throw ArgumentError(std::string(what) +
                        ": both treatment arms must be non-empty");
  }
}

// ---------------------------------------------------------------------------
// Schema config

SchemaConfig SchemaConfig::FromJson(const nlohmann::json& j) {
  SchemaConfig c;
  c.id_column = j.value("id_column", c.id_column);
  c.treatment_column = j.value("treatment_column", c.treatment_column);
  c.time_column = j.value("time_column", c.time_column);
  c.event_column = j.value("event_column", c.event_column);
  if (j.contains("treatment_labels")) {
    for (const auto& [label, code] : j.at("treatment_labels").items()) {
      const int v = code.get<int>();
      ArmFromInt(v);
      c.treatment_labels[label] = v;
    }
  }
  if (j.contains("covariates")) {
    c.covariates = j.at("covariates").get<std::vector<std::string>>();
  }
  if (j.contains("ignore_columns")) {
    c.ignore_columns = j.at("ignore_columns").get<std::vector<std::string>>();
  }
  const std::string missing = j.value("missing", std::string("reject-file"));
  if (missing == "reject-file") {
    c.missing = MissingPolicy::kRejectFile;
  } else if (missing == "drop-row") {
    c.missing = MissingPolicy::kDropRow;
  } else {
    throw ArgumentError("missing policy must be reject-file or drop-row, got " +
                        missing);
  }
  return c;
}

nlohmann::json SchemaConfig::ToJson() const {
  nlohmann::json j;
  j["id_column"] = id_column;
  j["treatment_column"] = treatment_column;
  j["time_column"] = time_column;
  j["event_column"] = event_column;
  j["treatment_labels"] = nlohmann::json::object();
  for (const auto& [k, v] : treatment_labels) j["treatment_labels"][k] = v;
  j["covariates"] = covariates;
  j["ignore_columns"] = ignore_columns;
  j["missing"] = missing == MissingPolicy::kRejectFile ? "reject-file" : "drop-row";
  return j;
}

std::string SchemaConfig::LabelFor(Arm a) const {
  for (const auto& [label, code] : treatment_labels) {
    if (code == ToInt(a)) return label;
  }
  return std::to_string(ToInt(a));
}

SchemaConfig LoadSchemaConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid schema config " + path + ": " + e.what());
  }
  return SchemaConfig::FromJson(j);
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::size_t RequireColumn(const csv::Table& t, const std::string& name) {
  auto c = t.Column(name);
  if (!c) throw SchemaError("missing column: " + name);
  return *c;
}

Arm ParseTreatment(const std::string& raw, const SchemaConfig& config,
                   std::size_t row) {
  if (!config.treatment_labels.empty()) {
    auto it = config.treatment_labels.find(raw);
    if (it == config.treatment_labels.end()) {
      throw ValueError("row " + std::to_string(row + 1) +
                       ": treatment value '" + raw + "' is not mapped");
    }
    return ArmFromInt(it->second);
  }
  if (raw == "-1") return Arm::kMinus;
  if (raw == "1" || raw == "+1") return Arm::kPlus;
  throw ValueError("row " + std::to_string(row + 1) + ": treatment value '" + raw +
                   "' is not -1 or +1");
}

bool ParseEvent(const std::string& raw, std::size_t row) {
  if (raw == "1" || raw == "true" || raw == "TRUE") return true;
  if (raw == "0" || raw == "false" || raw == "FALSE") return false;
  throw ValueError("row " + std::to_string(row + 1) + ": event value '" + raw +
                   "' is not 0/1");
}

}  // namespace

Cohort ReadCohort(std::istream& in, const SchemaConfig& config) {
  const csv::Table t = csv::Read(in);
  if (t.rows.empty()) throw InputError("cohort file has no data rows");

  const std::size_t id_col = RequireColumn(t, config.id_column);
  const std::size_t trt_col = RequireColumn(t, config.treatment_column);
  const std::size_t time_col = RequireColumn(t, config.time_column);
  const std::size_t event_col = RequireColumn(t, config.event_column);

  Cohort cohort;
  std::vector<std::size_t> cov_cols;
  if (config.covariates.empty()) {
    std::set<std::size_t> reserved{id_col, trt_col, time_col, event_col};
    for (const auto& name : config.ignore_columns) {
      if (auto c = t.Column(name)) reserved.insert(*c);
    }
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      if (reserved.count(c)) continue;
      cov_cols.push_back(c);
      cohort.schema.push_back(t.header[c]);
    }
  } else {
    for (const auto& name : config.covariates) {
      cov_cols.push_back(RequireColumn(t, name));
      cohort.schema.push_back(name);
    }
  }

  cohort.subjects.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    Subject s;
    s.id = row[id_col];
    s.treatment = ParseTreatment(row[trt_col], config, r);
    auto time = csv::ParseDouble(row[time_col]);
    if (!time || *time < 0.0) {
      throw ValueError("row " + std::to_string(r + 1) + ": invalid time '" +
                       row[time_col] + "'");
    }
    s.time = *time;
    s.event = ParseEvent(row[event_col], r);
    bool missing = false;
    for (std::size_t c : cov_cols) {
      auto v = csv::ParseDouble(row[c]);
      if (!v) {
        if (config.missing == MissingPolicy::kRejectFile) {
          throw ValueError("row " + std::to_string(r + 1) + ": covariate '" +
                           t.header[c] + "' is missing or non-numeric ('" +
                           row[c] + "')");
        }
        missing = true;
        break;
      }
      s.covariates.push_back(*v);
    }
    if (missing) continue;
    cohort.subjects.push_back(std::move(s));
  }
  if (cohort.subjects.empty()) throw InputError("no usable rows in cohort file");
  return cohort;
}

Cohort LoadCohort(const std::string& path, const SchemaConfig& config) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open cohort file: " + path);
  try {
    return ReadCohort(in, config);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void WriteCohort(std::ostream& out, const Cohort& cohort,
                 const SchemaConfig& config) {
  out << csv::Escape(config.id_column) << ','
      << csv::Escape(config.treatment_column) << ','
      << csv::Escape(config.time_column) << ','
      << csv::Escape(config.event_column);
  for (const auto& name : cohort.schema) out << ',' << csv::Escape(name);
  out << '\n';
  for (const auto& s : cohort.subjects) {
    out << csv::Escape(s.id) << ',' << csv::Escape(config.LabelFor(s.treatment))
        << ',' << csv::FormatDouble(s.time) << ',' << (s.event ? 1 : 0);
    for (double x : s.covariates) out << ',' << csv::FormatDouble(x);
    out << '\n';
  }
}

void SaveCohort(const std::string& path, const Cohort& cohort,
                const SchemaConfig& config) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write cohort file: " + path);
  WriteCohort(out, cohort, config);
}

// ---------------------------------------------------------------------------
// Horizon restriction

Cohort RestrictHorizon(const Cohort& cohort, double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ArgumentError("horizon must be > 0");
  }
  Cohort out = cohort;
  out.horizon = horizon;
  for (auto& s : out.subjects) {
    s.needs_imputation = false;
    if (s.time >= horizon) {
      s.reward = horizon;
      s.event = false;
    } else if (s.event) {
      s.reward = s.time;
    } else {
      s.reward.reset();
      s.needs_imputation = true;
    }
  }
  return out;
}

Cohort UseTimeAsReward(const Cohort& cohort) {
  Cohort out = cohort;
  for (auto& s : out.subjects) {
    if (!s.event) {
      throw ArgumentError("subject " + s.id +
                          " is censored; a horizon and imputation are required");
    }
    s.reward = s.time;
    s.needs_imputation = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Folds

FoldAssignment::FoldAssignment(int k, std::vector<int> assignment)
    : k_(k), assignment_(std::move(assignment)) {
  if (k < 1) throw ArgumentError("fold count must be positive");
  for (int f : assignment_) {
    if (f < 0 || f >= k) throw ArgumentError("fold index out of range");
  }
}

std::vector<std::size_t> FoldAssignment::TestIndices(int fold) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] == fold) idx.push_back(i);
  }
  return idx;
}

std::vector<std::size_t> FoldAssignment::TrainIndices(int fold) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] != fold) idx.push_back(i);
  }
  return idx;
}

std::vector<std::size_t> FoldAssignment::FoldSizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
  for (int f : assignment_) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

std::uint64_t FoldAssignment::Fingerprint() const {
  std::uint64_t h = SplitMix64(static_cast<std::uint64_t>(k_));
  for (int f : assignment_) h = SplitMix64(h ^ static_cast<std::uint64_t>(f));
  return h;
}

FoldAssignment KFoldSplit(std::span<const Arm> arms, int k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("k must be >= 2");
  if (static_cast<std::size_t>(k) > arms.size()) {
    throw ArgumentError("k = " + std::to_string(k) + " exceeds cohort size " +
                        std::to_string(arms.size()));
  }
  Rng rng(DeriveSeed(seed, Stage::kFolds));
  std::vector<int> assignment(arms.size(), 0);
  // Deal each arm round-robin, continuing the fold counter across arms so
  // total fold sizes differ by at most one.
  int next = 0;
  for (Arm arm : {Arm::kMinus, Arm::kPlus}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < arms.size(); ++i) {
      if (arms[i] == arm) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) {
      assignment[i] = next;
      next = (next + 1) % k;
    }
  }
  return FoldAssignment(k, std::move(assignment));
}

FoldAssignment KFoldSplit(const Cohort& cohort, int k, std::uint64_t seed) {
  const auto arms = cohort.Treatments();
  return KFoldSplit(arms, k, seed);
}

}  // namespace itr
