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

#include "itr/survival.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itr/errors.h"

namespace itr {

double LogRankSorted(std::span<const double> times, std::span<const char> events,
                     std::span<const char> in_left) {
  const std::size_t n = times.size();
  double n_at_risk = static_cast<double>(n);
  double n_left = 0.0;
  for (char l : in_left) n_left += l ? 1.0 : 0.0;

  double o_minus_e = 0.0;
  double var = 0.0;
  std::size_t k = 0;
  while (k < n) {
    const double t = times[k];
    double d = 0.0, d_left = 0.0, removed = 0.0, removed_left = 0.0;
    for (; k < n && times[k] == t; ++k) {
      removed += 1.0;
      if (in_left[k]) removed_left += 1.0;
      if (events[k]) {
        d += 1.0;
        if (in_left[k]) d_left += 1.0;
      }
    }
    if (d > 0.0) {
      const double m = n_at_risk;
      o_minus_e += d_left - n_left * d / m;
      if (m > 1.0) {
        var += n_left * (m - n_left) * d * (m - d) / (m * m * (m - 1.0));
      }
    }
    n_at_risk -= removed;
    n_left -= removed_left;
  }
  if (var <= 0.0) return 0.0;
  return o_minus_e * o_minus_e / var;
}

double LogRankStatistic(const SurvivalSample& left, const SurvivalSample& right) {
  if (left.times.size() != left.events.size() ||
      right.times.size() != right.events.size()) {
    throw ArgumentError("log-rank: times and events differ in length");
  }
  if (left.times.empty() || right.times.empty()) {
    throw ArgumentError("log-rank: both groups must be non-empty");
  }
  const std::size_t n = left.times.size() + right.times.size();
  struct Obs {
    double t;
    char event;
    char left;
  };
  std::vector<Obs> obs;
  obs.reserve(n);
  bool any_event = false;
  for (std::size_t i = 0; i < left.times.size(); ++i) {
    obs.push_back({left.times[i], static_cast<char>(left.events[i]), 1});
    any_event = any_event || left.events[i];
  }
  for (std::size_t i = 0; i < right.times.size(); ++i) {
    obs.push_back({right.times[i], static_cast<char>(right.events[i]), 0});
    any_event = any_event || right.events[i];
  }
  if (!any_event) throw DegenerateError("log-rank: no events in either group");
  std::stable_sort(obs.begin(), obs.end(),
                   [](const Obs& a, const Obs& b) { return a.t < b.t; });
  std::vector<double> t(n);
  std::vector<char> e(n), l(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = obs[i].t;
    e[i] = obs[i].event;
    l[i] = obs[i].left;
  }
  return LogRankSorted(t, e, l);
}

double SurvivalCurve::At(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

SurvivalCurve KaplanMeier(std::span<const double> times,
                          std::span<const char> events) {
  if (times.size() != events.size()) {
    throw ArgumentError("Kaplan-Meier: times and events differ in length");
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  SurvivalCurve curve;
  double at_risk = static_cast<double>(times.size());
  double s = 1.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double t = times[order[k]];
    double d = 0.0, removed = 0.0;
    for (; k < order.size() && times[order[k]] == t; ++k) {
      removed += 1.0;
      if (events[order[k]]) d += 1.0;
    }
    if (d > 0.0) {
      s *= 1.0 - d / at_risk;
      curve.times.push_back(t);
      curve.survival.push_back(s);
    }
    at_risk -= removed;
  }
  return curve;
}

double SupDistance(const SurvivalCurve& a, const SurvivalCurve& b, double horizon) {
  // Both are step functions; the supremum is attained at 0 or a jump time.
  double sup = std::abs(a.At(0.0) - b.At(0.0));
  for (const auto* c : {&a, &b}) {
    for (double t : c->times) {
      if (t > horizon) break;
      sup = std::max(sup, std::abs(a.At(t) - b.At(t)));
    }
  }
  return sup;
}

}  // namespace itr
