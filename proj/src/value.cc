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

#include "itr/value.h"

#include "itr/errors.h"

namespace itr {

double IpwValue(std::span<const double> reward, std::span<const Arm> treatment,
                std::span<const Arm> decision, std::span<const double> received_prob,
                bool normalized) {
  const std::size_t n = reward.size();
  if (treatment.size() != n || decision.size() != n || received_prob.size() != n) {
    throw ArgumentError("IPW value: input lengths differ");
  }
  double num = 0.0, den = 0.0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (treatment[i] != decision[i]) continue;
    if (!(received_prob[i] > 0.0)) {
      throw EvaluationError("IPW value: non-positive propensity for a matching subject");
    }
    const double w = 1.0 / received_prob[i];
    num += w * reward[i];
    den += w;
    ++matched;
  }
  if (matched == 0) throw EvaluationError("IPW value undefined: no subject follows the rule");
  return normalized ? num / den : num / static_cast<double>(n);
}

double IpwValue(const Cohort& cohort, const TreatmentRule& rule,
                const PropensityModel& propensity, bool normalized) {
  const auto y = cohort.Rewards();
  const auto a = cohort.Treatments();
  const auto d = rule.ApplyAll(cohort);
  const auto pi = propensity.ReceivedProbabilities(cohort);
  return IpwValue(y, a, d, pi, normalized);
}

}  // namespace itr
