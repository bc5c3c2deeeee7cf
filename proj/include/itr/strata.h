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

// Exact contingency-table engine for binary effect modifiers: stratum risks,
// standardized (counterfactual) risk under a stratum rule, and the rule that
// minimizes it.

#ifndef ITR_STRATA_H_
#define ITR_STRATA_H_

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "itr/cohort.h"

namespace itr {

struct CellCounts {
  std::int64_t died = 0;
  std::int64_t alive = 0;
  std::int64_t total() const { return died + alive; }
};

struct Stratum {
  std::vector<int> levels;  // one 0/1 entry per modifier
  CellCounts minus;         // arm -1
  CellCounts plus;          // arm +1

  const CellCounts& cell(Arm a) const { return a == Arm::kPlus ? plus : minus; }
  CellCounts& cell(Arm a) { return a == Arm::kPlus ? plus : minus; }
  std::int64_t total() const { return minus.total() + plus.total(); }
};

class StratifiedTable {
 public:
  StratifiedTable(std::vector<std::string> modifiers, std::vector<Stratum> strata,
                  std::array<std::string, 2> arm_labels = {"-1", "+1"});

  const std::vector<std::string>& modifiers() const { return modifiers_; }
  const std::vector<Stratum>& strata() const { return strata_; }
  const std::string& arm_label(Arm a) const {
    return arm_labels_[static_cast<std::size_t>(ArmIndex(a))];
  }
  std::int64_t grand_total() const;
  std::int64_t arm_total(Arm a) const;
  // "reduced_ef=1,ckd=0"
  std::string StratumName(std::size_t s) const;
  // Index of the stratum with these levels; throws ArgumentError.
  std::size_t FindStratum(const std::vector<int>& levels) const;

  StratifiedTable Scaled(std::int64_t factor) const;

 private:
  std::vector<std::string> modifiers_;
  std::vector<Stratum> strata_;
  std::array<std::string, 2> arm_labels_;
};

using StratumRule = std::map<std::vector<int>, Arm>;

struct StratumRisk {
  std::string name;
  double minus = 0.0;   // risk under arm -1 within the stratum
  double plus = 0.0;    // risk under arm +1 within the stratum
  double pooled = 0.0;  // both arms combined
  double risk(Arm a) const { return a == Arm::kPlus ? plus : minus; }
};

struct RiskSummary {
  std::vector<StratumRisk> strata;
  double crude_minus = 0.0;  // arm -1 over all strata
  double crude_plus = 0.0;
  double overall = 0.0;
};

// Per-(stratum, arm) risks plus the crude margins. Throws DegenerateError
// naming the stratum when a cell has no subjects.
RiskSummary StratumRisks(const StratifiedTable& table);

// sum_s (N_s / N) * risk(s, rule(s)) with N_s the stratum total over both
// arms. Throws ArgumentError if the rule misses a stratum.
double StandardizedRisk(const StratifiedTable& table, const StratumRule& rule);

StratumRule UniversalStratumRule(const StratifiedTable& table, Arm a);

// Arm with strictly lower risk in each stratum; `tie_arm` on equal risks.
StratumRule StratifiedOptimalRule(const StratifiedTable& table,
                                  Arm tie_arm = Arm::kMinus);

// Built-in hypothetical heart-failure populations: one modifier (ejection
// fraction) and three modifiers (ejection fraction, T2DM, CKD).
StratifiedTable Table1();
StratifiedTable Table3();

// CSV with columns (modifier columns..., arm, died, alive), one row per
// (stratum, arm). Arm values are -1/+1 or one of `arm_labels`.
StratifiedTable ReadStratifiedTable(std::istream& in,
                                    std::array<std::string, 2> arm_labels = {
                                        "-1", "+1"});
StratifiedTable LoadStratifiedTable(const std::string& path);

}  // namespace itr

#endif  // ITR_STRATA_H_
