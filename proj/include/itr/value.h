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

#ifndef ITR_VALUE_H_
#define ITR_VALUE_H_

#include <span>

#include "itr/cohort.h"
#include "itr/forest.h"
#include "itr/rule.h"

namespace itr {

// Inverse-probability-weighted value of a rule. `received_prob` is the
// probability of the arm each subject actually received. The normalized
// (Hajek) form divides by the sum of matching weights, the unnormalized form
// by n. Throws EvaluationError when no subject follows the rule.
double IpwValue(std::span<const double> reward, std::span<const Arm> treatment,
                std::span<const Arm> decision, std::span<const double> received_prob,
                bool normalized = true);

double IpwValue(const Cohort& cohort, const TreatmentRule& rule,
                const PropensityModel& propensity, bool normalized = true);

}  // namespace itr

#endif  // ITR_VALUE_H_
