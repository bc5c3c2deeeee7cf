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

#include "itr/rist.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itr/errors.h"

namespace itr {

void RistParams::Validate() const {
  if (n_trees < 1) throw ArgumentError("RIST n_trees must be >= 1");
  if (n_imputation_cycles < 1) throw ArgumentError("RIST cycles must be >= 1");
  if (min_events_per_leaf < 1) throw ArgumentError("min_events_per_leaf must be >= 1");
  if (n_random_splits < 1) throw ArgumentError("n_random_splits must be >= 1");
  if (min_leaf_size < 1) throw ArgumentError("min_leaf_size must be >= 1");
  if (mtry < 0) throw ArgumentError("mtry must be >= 0");
  if (!(arm_fraction > 0.0 && arm_fraction <= 1.0)) {
    throw ArgumentError("arm_fraction must be in (0, 1]");
  }
}

RistParams RistParams::FromJson(const nlohmann::json& j, const RistParams& defaults) {
  RistParams p = defaults;
  p.n_trees = j.value("n_trees", p.n_trees);
  p.n_imputation_cycles = j.value("n_imputation_cycles", p.n_imputation_cycles);
  p.min_events_per_leaf = j.value("min_events_per_leaf", p.min_events_per_leaf);
  p.n_random_splits = j.value("n_random_splits", p.n_random_splits);
  p.min_leaf_size = j.value("min_leaf_size", p.min_leaf_size);
  p.mtry = j.value("mtry", p.mtry);
  p.arm_fraction = j.value("arm_fraction", p.arm_fraction);
  return p;
}

nlohmann::json RistParams::ToJson() const {
  return {{"n_trees", n_trees},
          {"n_imputation_cycles", n_imputation_cycles},
          {"min_events_per_leaf", min_events_per_leaf},
          {"n_random_splits", n_random_splits},
          {"min_leaf_size", min_leaf_size},
          {"mtry", mtry},
          {"arm_fraction", arm_fraction}};
}

const SurvivalCurve& SurvivalTree::Curve(std::span<const double> x) const {
  const SurvivalTreeNode* node = &nodes.front();
  while (node->leaf < 0) {
    node = &nodes[static_cast<std::size_t>(
        x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                      : node->right)];
  }
  return curves[static_cast<std::size_t>(node->leaf)];
}

SurvivalCurve RistModel::EnsembleCurve(std::span<const double> x) const {
  if (x.size() != num_features_) {
    throw ArgumentError("RIST: covariate dimension mismatch");
  }
  struct Jump {
    double t;
    double delta;
  };
  std::vector<Jump> jumps;
  for (const auto& tree : trees_) {
    const SurvivalCurve& c = tree.Curve(x);
    double prev = 1.0;
    for (std::size_t k = 0; k < c.times.size(); ++k) {
      jumps.push_back({c.times[k], c.survival[k] - prev});
      prev = c.survival[k];
    }
  }
  std::stable_sort(jumps.begin(), jumps.end(),
                   [](const Jump& a, const Jump& b) { return a.t < b.t; });
  SurvivalCurve out;
  const double scale = 1.0 / static_cast<double>(trees_.size());
  double s = 1.0;
  for (std::size_t k = 0; k < jumps.size();) {
    const double t = jumps[k].t;
    for (; k < jumps.size() && jumps[k].t == t; ++k) s += jumps[k].delta * scale;
    out.times.push_back(t);
    out.survival.push_back(std::max(0.0, s));
  }
  return out;
}

namespace {

struct TrainingData {
  Matrix x;
  std::vector<double> time;
  std::vector<char> event;
};

TrainingData PrepareTraining(const Cohort& cohort) {
  if (!cohort.horizon) throw FitError("RIST: cohort has no horizon");
  const double h = *cohort.horizon;
  TrainingData d;
  d.x = cohort.Covariates();
  int events = 0;
  for (const auto& s : cohort.subjects) {
    const bool ev = s.event && s.time < h;
    d.time.push_back(std::min(s.time, h));
    d.event.push_back(ev ? 1 : 0);
    events += ev ? 1 : 0;
  }
  if (events == 0) throw FitError("RIST: no events before the horizon");
  return d;
}

class SurvivalTreeBuilder {
 public:
  SurvivalTreeBuilder(const TrainingData& data, const RistParams& params)
      : d_(data), params_(params) {}

  SurvivalTree Build(std::vector<std::uint32_t> sample, Rng& rng) {
    idx_ = std::move(sample);
    std::stable_sort(idx_.begin(), idx_.end(), [&](std::uint32_t a, std::uint32_t b) {
      return d_.time[a] < d_.time[b];
    });
    SurvivalTree tree;
    tree.nodes.emplace_back();
    struct Pending {
      std::size_t node, begin, end;
    };
    std::vector<Pending> stack{{0, 0, idx_.size()}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      auto split = FindSplit(p.begin, p.end, rng);
      if (split.feature < 0) {
        MakeLeaf(tree, p.node, p.begin, p.end);
        continue;
      }
      const auto f = static_cast<std::size_t>(split.feature);
      auto mid_it = std::stable_partition(
          idx_.begin() + static_cast<std::ptrdiff_t>(p.begin),
          idx_.begin() + static_cast<std::ptrdiff_t>(p.end),
          [&](std::uint32_t i) { return d_.x(i, f) <= split.threshold; });
      const auto mid = static_cast<std::size_t>(mid_it - idx_.begin());
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes[p.node].feature = split.feature;
      tree.nodes[p.node].threshold = split.threshold;
      tree.nodes[p.node].left = left;
      tree.nodes[p.node].right = left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stack.push_back({static_cast<std::size_t>(left + 1), mid, p.end});
      stack.push_back({static_cast<std::size_t>(left), p.begin, mid});
    }
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double stat = 0.0;
  };

  void MakeLeaf(SurvivalTree& tree, std::size_t node, std::size_t begin,
                std::size_t end) {
    std::vector<double> t;
    std::vector<char> e;
    int events = 0;
    for (std::size_t k = begin; k < end; ++k) {
      t.push_back(d_.time[idx_[k]]);
      e.push_back(d_.event[idx_[k]]);
      events += d_.event[idx_[k]];
    }
    tree.nodes[node].leaf = static_cast<int>(tree.curves.size());
    tree.curves.push_back(KaplanMeier(t, e));
    tree.leaf_events.push_back(events);
  }

  Split FindSplit(std::size_t begin, std::size_t end, Rng& rng) {
    Split best;
    const std::size_t n = end - begin;
    const std::size_t min_size = static_cast<std::size_t>(params_.min_leaf_size);
    const int min_events = params_.min_events_per_leaf;
    times_.resize(n);
    events_.resize(n);
    in_left_.resize(n);
    int total_events = 0;
    for (std::size_t k = 0; k < n; ++k) {
      times_[k] = d_.time[idx_[begin + k]];
      events_[k] = d_.event[idx_[begin + k]];
      total_events += events_[k];
    }
    if (n < 2 * min_size || total_events < 2 * min_events) return best;

    const std::size_t p = d_.x.cols();
    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), 0);
    std::size_t m = p;
    if (params_.mtry > 0 && static_cast<std::size_t>(params_.mtry) < p) {
      m = static_cast<std::size_t>(params_.mtry);
      for (std::size_t k = 0; k < m; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, p - 1);
        std::swap(features[k], features[pick(rng)]);
      }
      std::sort(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(m));
    }

    for (std::size_t fi = 0; fi < m; ++fi) {
      const std::size_t f = features[fi];
      double lo = d_.x(idx_[begin], f), hi = lo;
      for (std::size_t k = begin; k < end; ++k) {
        lo = std::min(lo, d_.x(idx_[k], f));
        hi = std::max(hi, d_.x(idx_[k], f));
      }
      if (!(lo < hi)) continue;
      std::uniform_real_distribution<double> draw(lo, hi);
      for (int r = 0; r < params_.n_random_splits; ++r) {
        const double thr = draw(rng);
        std::size_t nl = 0;
        int el = 0;
        for (std::size_t k = 0; k < n; ++k) {
          const bool left = d_.x(idx_[begin + k], f) <= thr;
          in_left_[k] = left ? 1 : 0;
          nl += left ? 1 : 0;
          el += left ? events_[k] : 0;
        }
        const std::size_t nr = n - nl;
        const int er = total_events - el;
        if (nl < min_size || nr < min_size || el < min_events || er < min_events) {
          continue;
        }
        const double stat = LogRankSorted(times_, events_, in_left_);
        if (stat > best.stat) best = {static_cast<int>(f), thr, stat};
      }
    }
    return best;
  }

  const TrainingData& d_;
  const RistParams& params_;
  std::vector<std::uint32_t> idx_;
  std::vector<double> times_;
  std::vector<char> events_;
  std::vector<char> in_left_;
};

}  // namespace

RistModel FitRist(const Cohort& cohort, const RistParams& params, std::uint64_t seed) {
  params.Validate();
  if (cohort.size() == 0) throw FitError("RIST: empty cohort");
  const TrainingData data = PrepareTraining(cohort);

  std::array<std::vector<std::uint32_t>, 2> by_arm;
  for (std::uint32_t i = 0; i < cohort.size(); ++i) {
    by_arm[static_cast<std::size_t>(ArmIndex(cohort.subjects[i].treatment))].push_back(i);
  }

  RistModel model;
  model.params_ = params;
  model.horizon_ = *cohort.horizon;
  model.seed_ = seed;
  model.num_features_ = cohort.num_covariates();
  SurvivalTreeBuilder builder(data, params);
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(DeriveSeed(seed, {static_cast<std::uint64_t>(t)}));
    std::vector<std::uint32_t> sample;
    for (auto arm_idx : by_arm) {
      if (arm_idx.empty()) continue;
      std::shuffle(arm_idx.begin(), arm_idx.end(), rng);
      const auto take = std::max<std::size_t>(
          1, static_cast<std::size_t>(params.arm_fraction * static_cast<double>(arm_idx.size())));
      sample.insert(sample.end(), arm_idx.begin(),
                    arm_idx.begin() + static_cast<std::ptrdiff_t>(take));
    }
    model.trees_.push_back(builder.Build(std::move(sample), rng));
  }
  return model;
}

double DrawConditionalTime(const SurvivalCurve& curve, double censor_time,
                           double horizon, Rng& rng) {
  const double s_c = curve.At(censor_time);
  auto first_after = std::upper_bound(curve.times.begin(), curve.times.end(), censor_time);
  if (s_c <= 0.0) return horizon;
  std::uniform_real_distribution<double> unif(0.0, s_c);
  const double u = unif(rng);
  for (auto it = first_after; it != curve.times.end(); ++it) {
    if (*it >= horizon) break;
    const auto k = static_cast<std::size_t>(it - curve.times.begin());
    if (curve.survival[k] <= u) return *it;
  }
  return horizon;
}

Cohort ImputeWithModel(const RistModel& model, const Cohort& cohort,
                       std::uint64_t seed) {
  if (!cohort.horizon || *cohort.horizon != model.horizon()) {
    throw ArgumentError("RIST model horizon does not match the cohort horizon");
  }
  const double h = model.horizon();
  Cohort out = cohort;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Subject& s = out.subjects[i];
    if (!s.needs_imputation) continue;
    Rng rng(DeriveSeed(seed, {i}));
    const double t = DrawConditionalTime(model.EnsembleCurve(s.covariates), s.time, h, rng);
    s.time = t;
    s.event = t < h;
    s.reward = t;
    s.needs_imputation = false;
    s.imputed = true;
  }
  return out;
}

ImputationResult ImputeCensored(const RistModel& model, const Cohort& cohort,
                                std::uint64_t seed) {
  ImputationResult result{ImputeWithModel(model, cohort, DeriveSeed(seed, {0})), model, {}};
  result.cycles.push_back(result.cohort);
  for (int c = 1; c < model.params().n_imputation_cycles; ++c) {
    const auto cycle = static_cast<std::uint64_t>(c);
    result.final_model = FitRist(result.cohort, model.params(), DeriveSeed(model.seed(), {cycle}));
    result.cohort = ImputeWithModel(result.final_model, cohort, DeriveSeed(seed, {cycle}));
    result.cycles.push_back(result.cohort);
  }
  return result;
}

ImputationResult FitAndImpute(const Cohort& cohort, const RistParams& params,
                              std::uint64_t seed) {
  if (cohort.CountNeedingImputation() == 0) return {cohort, RistModel{}, {cohort}};
  const RistModel model = FitRist(cohort, params, DeriveSeed(seed, {100}));
  return ImputeCensored(model, cohort, seed);
}

}  // namespace itr
