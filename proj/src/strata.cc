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

#include "itr/strata.h"

#include <fstream>
#include <set>

#include "itr/csv.h"
#include "itr/errors.h"

namespace itr {

StratifiedTable::StratifiedTable(std::vector<std::string> modifiers,
                                 std::vector<Stratum> strata,
                                 std::array<std::string, 2> arm_labels)
    : modifiers_(std::move(modifiers)),
      strata_(std::move(strata)),
      arm_labels_(std::move(arm_labels)) {
  if (strata_.empty()) throw ArgumentError("stratified table has no strata");
  std::set<std::vector<int>> seen;
  for (const auto& s : strata_) {
    if (s.levels.size() != modifiers_.size()) {
      throw ArgumentError("stratum level count does not match modifiers");
    }
    for (int l : s.levels) {
      if (l != 0 && l != 1) throw ArgumentError("modifier levels must be 0/1");
    }
    if (s.minus.died < 0 || s.minus.alive < 0 || s.plus.died < 0 ||
        s.plus.alive < 0) {
      throw ArgumentError("negative count in stratified table");
    }
    if (!seen.insert(s.levels).second) {
      throw ArgumentError("duplicate stratum in stratified table");
    }
  }
}

std::int64_t StratifiedTable::grand_total() const {
  std::int64_t n = 0;
  for (const auto& s : strata_) n += s.total();
  return n;
}

std::int64_t StratifiedTable::arm_total(Arm a) const {
  std::int64_t n = 0;
  for (const auto& s : strata_) n += s.cell(a).total();
  return n;
}

std::string StratifiedTable::StratumName(std::size_t s) const {
  std::string name;
  for (std::size_t m = 0; m < modifiers_.size(); ++m) {
    if (m) name += ',';
    name += modifiers_[m] + "=" + std::to_string(strata_[s].levels[m]);
  }
  return name.empty() ? "all" : name;
}

std::size_t StratifiedTable::FindStratum(const std::vector<int>& levels) const {
  for (std::size_t s = 0; s < strata_.size(); ++s) {
    if (strata_[s].levels == levels) return s;
  }
  throw ArgumentError("no stratum with the given modifier levels");
}

StratifiedTable StratifiedTable::Scaled(std::int64_t factor) const {
  if (factor <= 0) throw ArgumentError("scale factor must be positive");
  auto strata = strata_;
  for (auto& s : strata) {
    for (Arm a : {Arm::kMinus, Arm::kPlus}) {
      s.cell(a).died *= factor;
      s.cell(a).alive *= factor;
    }
  }
  return StratifiedTable(modifiers_, std::move(strata), arm_labels_);
}

namespace {

double CellRisk(const StratifiedTable& table, std::size_t s, Arm a) {
  const CellCounts& c = table.strata()[s].cell(a);
  if (c.total() <= 0) {
    throw DegenerateError("stratum " + table.StratumName(s) + ", arm " +
                          table.arm_label(a) + " has no subjects");
  }
  return static_cast<double>(c.died) / static_cast<double>(c.total());
}

}  // namespace

RiskSummary StratumRisks(const StratifiedTable& table) {
  RiskSummary out;
  std::int64_t died_minus = 0, died_plus = 0;
  for (std::size_t s = 0; s < table.strata().size(); ++s) {
    const Stratum& st = table.strata()[s];
    StratumRisk r;
    r.name = table.StratumName(s);
    r.minus = CellRisk(table, s, Arm::kMinus);
    r.plus = CellRisk(table, s, Arm::kPlus);
    r.pooled = static_cast<double>(st.minus.died + st.plus.died) /
               static_cast<double>(st.total());
    out.strata.push_back(std::move(r));
    died_minus += st.minus.died;
    died_plus += st.plus.died;
  }
  out.crude_minus = static_cast<double>(died_minus) /
                    static_cast<double>(table.arm_total(Arm::kMinus));
  out.crude_plus = static_cast<double>(died_plus) /
                   static_cast<double>(table.arm_total(Arm::kPlus));
  out.overall = static_cast<double>(died_minus + died_plus) /
                static_cast<double>(table.grand_total());
  return out;
}

double StandardizedRisk(const StratifiedTable& table, const StratumRule& rule) {
  // Accumulate N_s * died / total exactly as a sum of rationals would be
  // evaluated; only the per-stratum quotient is rounded.
  double acc = 0.0;
  for (std::size_t s = 0; s < table.strata().size(); ++s) {
    const Stratum& st = table.strata()[s];
    auto it = rule.find(st.levels);
    if (it == rule.end()) {
      throw ArgumentError("rule does not cover stratum " + table.StratumName(s));
    }
    acc += static_cast<double>(st.total()) * CellRisk(table, s, it->second);
  }
  return acc / static_cast<double>(table.grand_total());
}

StratumRule UniversalStratumRule(const StratifiedTable& table, Arm a) {
  StratumRule rule;
  for (const auto& s : table.strata()) rule[s.levels] = a;
  return rule;
}

StratumRule StratifiedOptimalRule(const StratifiedTable& table, Arm tie_arm) {
  StratumRule rule;
  for (std::size_t s = 0; s < table.strata().size(); ++s) {
    // Compare died_m / n_m against died_p / n_p by cross-multiplication so
    // ties are detected exactly.
    const Stratum& st = table.strata()[s];
    CellRisk(table, s, Arm::kMinus);
    CellRisk(table, s, Arm::kPlus);
    const __int128 lhs = static_cast<__int128>(st.minus.died) * st.plus.total();
    const __int128 rhs = static_cast<__int128>(st.plus.died) * st.minus.total();
    Arm a = tie_arm;
    if (lhs < rhs) a = Arm::kMinus;
    if (rhs < lhs) a = Arm::kPlus;
    rule[st.levels] = a;
  }
  return rule;
}

StratifiedTable Table1() {
  // reduced_ef = 1: reduced ejection fraction.
  std::vector<Stratum> strata = {
      {{1}, {7000, 2000}, {100, 1000}},
      {{0}, {2000, 6000}, {1500, 250}},
  };
  return StratifiedTable({"reduced_ef"}, std::move(strata),
                         {"furosemide", "torsemide"});
}

StratifiedTable Table3() {
  std::vector<Stratum> strata;
  for (int t2dm : {1, 0}) {
    strata.push_back({{1, t2dm, 1}, {3350, 200}, {15, 400}});
    strata.push_back({{1, t2dm, 0}, {150, 800}, {35, 100}});
    strata.push_back({{0, t2dm, 1}, {500, 1500}, {375, 63}});
    strata.push_back({{0, t2dm, 0}, {500, 1500}, {375, 62}});
  }
  return StratifiedTable({"reduced_ef", "t2dm", "ckd"}, std::move(strata),
                         {"furosemide", "torsemide"});
}

StratifiedTable ReadStratifiedTable(std::istream& in,
                                    std::array<std::string, 2> arm_labels) {
  const csv::Table t = csv::Read(in);
  if (t.rows.empty()) throw InputError("stratified table has no data rows");
  const auto arm_col = t.Column("arm");
  const auto died_col = t.Column("died");
  const auto alive_col = t.Column("alive");
  if (!arm_col) throw SchemaError("missing column: arm");
  if (!died_col) throw SchemaError("missing column: died");
  if (!alive_col) throw SchemaError("missing column: alive");

  std::vector<std::size_t> mod_cols;
  std::vector<std::string> modifiers;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == *arm_col || c == *died_col || c == *alive_col) continue;
    mod_cols.push_back(c);
    modifiers.push_back(t.header[c]);
  }

  auto parse_count = [](const std::string& v, std::size_t row) {
    auto d = csv::ParseDouble(v);
    if (!d || *d < 0 || *d != static_cast<double>(static_cast<std::int64_t>(*d))) {
      throw ValueError("row " + std::to_string(row + 1) + ": invalid count '" + v + "'");
    }
    return static_cast<std::int64_t>(*d);
  };

  std::map<std::vector<int>, Stratum> by_levels;
  std::map<std::vector<int>, std::array<bool, 2>> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::vector<int> levels;
    for (std::size_t c : mod_cols) {
      if (row[c] == "0") {
        levels.push_back(0);
      } else if (row[c] == "1") {
        levels.push_back(1);
      } else {
        throw ValueError("row " + std::to_string(r + 1) + ": modifier '" +
                         t.header[c] + "' must be 0 or 1");
      }
    }
    Arm arm;
    const std::string& a = row[*arm_col];
    if (a == "-1" || a == arm_labels[0]) {
      arm = Arm::kMinus;
    } else if (a == "1" || a == "+1" || a == arm_labels[1]) {
      arm = Arm::kPlus;
    } else {
      throw ValueError("row " + std::to_string(r + 1) + ": unknown arm '" + a + "'");
    }
    auto& st = by_levels[levels];
    st.levels = levels;
    auto& flags = seen[levels];
    if (flags[static_cast<std::size_t>(ArmIndex(arm))]) {
      throw ValueError("row " + std::to_string(r + 1) + ": duplicate (stratum, arm)");
    }
    flags[static_cast<std::size_t>(ArmIndex(arm))] = true;
    st.cell(arm) = {parse_count(row[*died_col], r), parse_count(row[*alive_col], r)};
  }
  std::vector<Stratum> strata;
  for (auto& [levels, st] : by_levels) strata.push_back(st);
  return StratifiedTable(std::move(modifiers), std::move(strata),
                         std::move(arm_labels));
}

StratifiedTable LoadStratifiedTable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("file not found: " + path);
  return ReadStratifiedTable(in);
}

}  // namespace itr
