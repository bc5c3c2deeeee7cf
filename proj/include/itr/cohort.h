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

// Cohort data model shared by every estimator: subjects with covariates, a
// binary treatment coded {-1, +1}, a right-censored follow-up time and the
// reward derived from it once a horizon is applied.

#ifndef ITR_COHORT_H_
#define ITR_COHORT_H_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "itr/matrix.h"

namespace itr {

enum class Arm : int { kMinus = -1, kPlus = 1 };

inline double Sign(Arm a) { return static_cast<double>(static_cast<int>(a)); }
inline int ToInt(Arm a) { return static_cast<int>(a); }
inline Arm Opposite(Arm a) { return a == Arm::kPlus ? Arm::kMinus : Arm::kPlus; }
// Throws ValueError unless v is -1 or +1.
Arm ArmFromInt(int v);
// 0 for kMinus, 1 for kPlus; used as a class label.
inline int ArmIndex(Arm a) { return a == Arm::kPlus ? 1 : 0; }

struct Subject {
  std::string id;
  std::vector<double> covariates;
  Arm treatment = Arm::kMinus;
  double time = 0.0;  // observed follow-up, days
  bool event = false;  // true: outcome at `time`; false: censored at `time`
  std::optional<double> reward;
  bool needs_imputation = false;
  bool imputed = false;

  friend bool operator==(const Subject&, const Subject&) = default;
};

struct Cohort {
  std::vector<std::string> schema;
  std::vector<Subject> subjects;
  std::optional<double> horizon;

  std::size_t size() const { return subjects.size(); }
  std::size_t num_covariates() const { return schema.size(); }

  Matrix Covariates() const;
  std::vector<Arm> Treatments() const;
  // Throws ArgumentError if any subject lacks a completed reward.
  std::vector<double> Rewards() const;
  bool HasCompletedRewards() const;
  std::size_t CountArm(Arm a) const;
  std::size_t CountNeedingImputation() const;

  Cohort Subset(std::span<const std::size_t> indices) const;
  // Keeps only the named covariates, in the given order.
  Cohort SelectCovariates(const std::vector<std::string>& names) const;

  // Validates the structural invariants; throws ArgumentError.
  void Validate() const;
  // Throws ArgumentError unless both arms are non-empty.
  void RequireBothArms(const char* what) const;

  friend bool operator==(const Cohort&, const Cohort&) = default;
};

enum class MissingPolicy { kRejectFile, kDropRow };

// Column mapping for cohort CSV files.
struct SchemaConfig {
  std::string id_column = "id";
  std::string treatment_column = "treatment";
  std::string time_column = "time";
  std::string event_column = "event";
  // Label -> arm. Empty map accepts the literal codes -1, 1 and +1.
  std::map<std::string, int> treatment_labels;
  // Empty: every column not named above, in file order.
  std::vector<std::string> covariates;
  // Columns never used as covariates (e.g. other outcomes in the same file).
  std::vector<std::string> ignore_columns;
  MissingPolicy missing = MissingPolicy::kRejectFile;

  static SchemaConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  // Label to write for an arm; the integer code when no mapping exists.
  std::string LabelFor(Arm a) const;
};

SchemaConfig LoadSchemaConfig(const std::string& path);

Cohort ReadCohort(std::istream& in, const SchemaConfig& config);
Cohort LoadCohort(const std::string& path, const SchemaConfig& config);

void WriteCohort(std::ostream& out, const Cohort& cohort,
                 const SchemaConfig& config);
void SaveCohort(const std::string& path, const Cohort& cohort,
                const SchemaConfig& config);

// Applies a restricted-time horizon: reward = min(time, horizon). Follow-up
// reaching the horizon counts as event-free through it; censoring before the
// horizon leaves the reward unset and flags the subject for imputation.
Cohort RestrictHorizon(const Cohort& cohort, double horizon);

// Uses `time` as the reward for a cohort without censoring and without a
// horizon. Throws ArgumentError when a subject is censored.
Cohort UseTimeAsReward(const Cohort& cohort);

class FoldAssignment {
 public:
  FoldAssignment(int k, std::vector<int> assignment);

  int k() const { return k_; }
  const std::vector<int>& assignment() const { return assignment_; }
  std::vector<std::size_t> TestIndices(int fold) const;
  std::vector<std::size_t> TrainIndices(int fold) const;
  std::vector<std::size_t> FoldSizes() const;
  std::uint64_t Fingerprint() const;

  friend bool operator==(const FoldAssignment&,
                         const FoldAssignment&) = default;

 private:
  int k_;
  std::vector<int> assignment_;
};

// Arm-stratified k-fold split, deterministic given the seed.
FoldAssignment KFoldSplit(const Cohort& cohort, int k, std::uint64_t seed);
// Same split for plain arm labels (used by inner cross-validation).
FoldAssignment KFoldSplit(std::span<const Arm> arms, int k, std::uint64_t seed);

}  // namespace itr

#endif  // ITR_COHORT_H_
