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

#ifndef ITR_RULE_H_
#define ITR_RULE_H_

#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "itr/cohort.h"
#include "itr/forest.h"
#include "itr/function.h"

namespace itr {

// Feature map for linear decision functions. The quadratic basis appends all
// pairwise products x_i * x_j (i < j) and then the squares.
enum class Basis { kLinear, kQuadratic };

std::size_t BasisSize(std::size_t p, Basis basis);
std::vector<double> ExpandBasis(std::span<const double> x, Basis basis);
Matrix ExpandBasis(const Matrix& x, Basis basis);
const char* BasisName(Basis basis);
Basis ParseBasis(const std::string& name);

struct UniversalRule {
  Arm arm = Arm::kPlus;
};

// sign(weights . phi(x) + intercept), 0 -> tie arm.
struct LinearRule {
  std::size_t num_features = 0;
  Basis basis = Basis::kLinear;
  std::vector<double> weights;
  double intercept = 0.0;
  Arm tie = Arm::kMinus;
};

// Arm with the larger predicted reward.
struct PairedForestRule {
  Forest minus;
  Forest plus;
  Arm tie = Arm::kMinus;
};

// Looks up the first levels.size() covariates (0/1 indicators).
struct StratumLookupRule {
  std::size_t num_modifiers = 0;
  std::map<std::vector<int>, Arm> table;
};

// sign of a known contrast function; used for ground-truth optimal rules.
struct ContrastRule {
  CovariateFunction contrast;
  Arm tie = Arm::kMinus;
};

class TreatmentRule {
 public:
  using Variant = std::variant<UniversalRule, LinearRule, PairedForestRule,
                               StratumLookupRule, ContrastRule>;

  TreatmentRule(Variant v) : v_(std::move(v)) {}  // NOLINT: implicit by intent

  static TreatmentRule Universal(Arm a) { return TreatmentRule(UniversalRule{a}); }

  const Variant& variant() const { return v_; }
  // "universal", "linear", "paired-forest", "stratum-lookup", "contrast".
  std::string kind() const;

  // Throws ArgumentError when x has the wrong dimension.
  Arm Apply(std::span<const double> x) const;
  std::vector<Arm> ApplyAll(const Cohort& cohort) const;
  std::vector<Arm> ApplyAll(const Matrix& x) const;

  nlohmann::json ToJson() const;
  static TreatmentRule FromJson(const nlohmann::json& j);

 private:
  Variant v_;
};

void SaveRule(const std::string& path, const TreatmentRule& rule);
TreatmentRule LoadRule(const std::string& path);

}  // namespace itr

#endif  // ITR_RULE_H_
