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

#include <sstream>

#include "itr/errors.h"
#include "itr/random.h"
#include "itr/strata.h"

namespace itr {
namespace {

double Round2(double v) { return std::round(v * 100.0) / 100.0; }

TEST(StratumRisks, TableOneCells) {
  const RiskSummary r = StratumRisks(Table1());
  const StratifiedTable t = Table1();
  const auto& reduced = r.strata[t.FindStratum({1})];
  const auto& preserved = r.strata[t.FindStratum({0})];
  EXPECT_DOUBLE_EQ(reduced.minus, 7000.0 / 9000.0);
  EXPECT_DOUBLE_EQ(reduced.plus, 100.0 / 1100.0);
  EXPECT_EQ(Round2(reduced.minus), 0.78);
  EXPECT_EQ(Round2(reduced.plus), 0.09);
  EXPECT_EQ(Round2(preserved.minus), 0.25);
  EXPECT_EQ(Round2(preserved.plus), 0.86);
  EXPECT_EQ(Round2(reduced.pooled), 0.70);
  EXPECT_EQ(Round2(preserved.pooled), 0.36);
  EXPECT_EQ(Round2(r.crude_minus), 0.53);
  EXPECT_EQ(Round2(r.crude_plus), 0.56);
  EXPECT_EQ(Round2(r.overall), 0.53);
}

TEST(StratumRisks, ZeroDeathsAndDegenerateCells) {
  const StratifiedTable ok({"m"}, {{{0}, {0, 10}, {3, 7}}, {{1}, {1, 1}, {2, 2}}});
  EXPECT_EQ(StratumRisks(ok).strata[0].minus, 0.0);
  const StratifiedTable bad({"m"}, {{{0}, {0, 0}, {3, 7}}, {{1}, {1, 1}, {2, 2}}});
  try {
    StratumRisks(bad);
    FAIL() << "expected DegenerateError";
  } catch (const DegenerateError& e) {
    EXPECT_NE(std::string(e.what()).find("m=0"), std::string::npos) << e.what();
  }
}

TEST(StandardizedRisk, TableOneRules) {
  const StratifiedTable t = Table1();
  // Oracle values by hand from the cell counts.
  const double fur = (10100.0 * 7000.0 / 9000.0 + 9750.0 * 0.25) / 19850.0;
  const double tor = (10100.0 * 100.0 / 1100.0 + 9750.0 * 1500.0 / 1750.0) / 19850.0;
  const double tailored = (10100.0 * 100.0 / 1100.0 + 9750.0 * 0.25) / 19850.0;
  EXPECT_NEAR(StandardizedRisk(t, UniversalStratumRule(t, Arm::kMinus)), fur, 1e-15);
  EXPECT_NEAR(StandardizedRisk(t, UniversalStratumRule(t, Arm::kPlus)), tor, 1e-15);
  EXPECT_NEAR(StandardizedRisk(t, StratifiedOptimalRule(t)), tailored, 1e-15);
  EXPECT_NEAR(fur, 0.5185, 5e-5);
  EXPECT_NEAR(tor, 0.4673, 5e-5);
  EXPECT_NEAR(tailored, 0.1690, 1e-4);
  EXPECT_EQ(Round2(fur), 0.52);
  EXPECT_EQ(Round2(tor), 0.47);
  EXPECT_EQ(Round2(tailored), 0.17);
}

TEST(StandardizedRisk, TableThreeRules) {
  const StratifiedTable t = Table3();
  EXPECT_NEAR(StandardizedRisk(t, UniversalStratumRule(t, Arm::kMinus)), 0.52, 0.005);
  EXPECT_NEAR(StandardizedRisk(t, UniversalStratumRule(t, Arm::kPlus)), 0.46, 0.005);
  EXPECT_NEAR(StandardizedRisk(t, StratifiedOptimalRule(t)), 0.15, 0.005);
}

TEST(StandardizedRisk, RuleMustCoverEveryStratum) {
  const StratifiedTable t = Table1();
  StratumRule partial = {{{1}, Arm::kPlus}};
  EXPECT_THROW(StandardizedRisk(t, partial), ArgumentError);
}

TEST(OptimalRule, TableOne) {
  const StratumRule r = StratifiedOptimalRule(Table1());
  EXPECT_EQ(r.at({1}), Arm::kPlus);
  EXPECT_EQ(r.at({0}), Arm::kMinus);
}

TEST(OptimalRule, TableThreeNeedsReducedEfAndCkd) {
  const StratifiedTable t = Table3();
  const StratumRule r = StratifiedOptimalRule(t);
  ASSERT_EQ(r.size(), 8u);
  for (const auto& [levels, arm] : r) {
    const bool expect_plus = levels[0] == 1 && levels[2] == 1;
    EXPECT_EQ(arm, expect_plus ? Arm::kPlus : Arm::kMinus) << t.StratumName(t.FindStratum(levels));
  }
}

TEST(OptimalRule, TiesUseDefaultArm) {
  const StratifiedTable t({"m"}, {{{0}, {1, 3}, {2, 6}}, {{1}, {5, 5}, {1, 9}}});
  EXPECT_EQ(StratifiedOptimalRule(t, Arm::kMinus).at({0}), Arm::kMinus);
  EXPECT_EQ(StratifiedOptimalRule(t, Arm::kPlus).at({0}), Arm::kPlus);
  EXPECT_EQ(StratifiedOptimalRule(t, Arm::kMinus).at({1}), Arm::kPlus);
}

StratifiedTable RandomTable(Rng& rng) {
  const int m = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<std::string> mods;
  for (int j = 0; j < m; ++j) mods.push_back("m" + std::to_string(j));
  std::vector<Stratum> strata;
  for (int s = 0; s < (1 << m); ++s) {
    Stratum st;
    for (int j = 0; j < m; ++j) st.levels.push_back((s >> j) & 1);
    for (CellCounts* c : {&st.minus, &st.plus}) {
      c->died = std::uniform_int_distribution<int>(0, 50)(rng);
      c->alive = std::uniform_int_distribution<int>(1, 50)(rng);
    }
    strata.push_back(st);
  }
  return StratifiedTable(mods, strata);
}

TEST(StandardizedRisk, OptimalBeatsUniversalOnRandomTables) {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const StratifiedTable t = RandomTable(rng);
    const double opt = StandardizedRisk(t, StratifiedOptimalRule(t));
    EXPECT_LE(opt, StandardizedRisk(t, UniversalStratumRule(t, Arm::kMinus)) + 1e-12);
    EXPECT_LE(opt, StandardizedRisk(t, UniversalStratumRule(t, Arm::kPlus)) + 1e-12);
  }
}

TEST(StandardizedRisk, InvariantToUniformScaling) {
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const StratifiedTable t = RandomTable(rng);
    const std::int64_t factor = std::uniform_int_distribution<int>(2, 1000)(rng);
    const StratifiedTable scaled = t.Scaled(factor);
    EXPECT_EQ(StratifiedOptimalRule(scaled), StratifiedOptimalRule(t));
    for (const StratumRule& rule : {StratifiedOptimalRule(t), UniversalStratumRule(t, Arm::kPlus)}) {
      EXPECT_NEAR(StandardizedRisk(scaled, rule), StandardizedRisk(t, rule), 1e-13);
    }
  }
}

TEST(StratifiedTable, ReadsCsv) {
  std::istringstream in(
      "reduced_ef,arm,died,alive\n"
      "1,furosemide,7000,2000\n"
      "1,torsemide,100,1000\n"
      "0,furosemide,2000,6000\n"
      "0,torsemide,1500,250\n");
  const StratifiedTable t = ReadStratifiedTable(in, {"furosemide", "torsemide"});
  EXPECT_EQ(t.grand_total(), 19850);
  EXPECT_NEAR(StandardizedRisk(t, StratifiedOptimalRule(t)),
              StandardizedRisk(Table1(), StratifiedOptimalRule(Table1())), 1e-15);
  std::istringstream bad("reduced_ef,arm,died\n1,furosemide,1\n");
  EXPECT_THROW(ReadStratifiedTable(bad, {"furosemide", "torsemide"}), SchemaError);
  EXPECT_THROW(LoadStratifiedTable("/nonexistent/table.csv"), InputError);
}

}  // namespace
}  // namespace itr
