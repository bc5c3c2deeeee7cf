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

#ifndef ITR_SURVIVAL_H_
#define ITR_SURVIVAL_H_

#include <span>
#include <vector>

namespace itr {

struct SurvivalSample {
  std::vector<double> times;
  std::vector<bool> events;
};

// Two-sample log-rank chi-square statistic (O - E)^2 / V. Throws
// ArgumentError if a side is empty and DegenerateError when neither side has
// an event.
double LogRankStatistic(const SurvivalSample& left, const SurvivalSample& right);

// Same statistic for pre-sorted data: `times` ascending, `in_left` marking
// group membership. Returns 0 when the variance vanishes. No validation.
double LogRankSorted(std::span<const double> times, std::span<const char> events,
                     std::span<const char> in_left);

// Right-continuous non-increasing step function starting at 1.
struct SurvivalCurve {
  std::vector<double> times;     // strictly increasing jump times
  std::vector<double> survival;  // value from times[k] on

  double At(double t) const;
  friend bool operator==(const SurvivalCurve&, const SurvivalCurve&) = default;
};

// Product-limit estimate. At tied times events are processed before
// censorings.
SurvivalCurve KaplanMeier(std::span<const double> times,
                          std::span<const char> events);

// sup_t |a(t) - b(t)| over t in [0, horizon].
double SupDistance(const SurvivalCurve& a, const SurvivalCurve& b, double horizon);

}  // namespace itr

#endif  // ITR_SURVIVAL_H_
