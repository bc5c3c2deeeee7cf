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

#include "itr/forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itr/errors.h"
#include "itr/random.h"

namespace itr {

double GiniImpurity(std::span<const std::int64_t> class_counts) {
  std::int64_t n = 0;
  for (auto c : class_counts) {
    if (c < 0) throw ArgumentError("class counts must be non-negative");
    n += c;
  }
  if (n == 0) throw ArgumentError("gini impurity of an empty node");
  double sum_sq = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

// ---------------------------------------------------------------------------
// Params

int ForestParams::ResolveMtry(std::size_t p) const {
  if (mtry > 0) return mtry;
  return std::max(1, static_cast<int>((p + 2) / 3));
}

void ForestParams::Validate(std::size_t p) const {
  if (n_trees < 1) throw ArgumentError("n_trees must be >= 1");
  if (p == 0) throw ArgumentError("forest needs at least one covariate");
  const int m = ResolveMtry(p);
  if (m < 1 || static_cast<std::size_t>(m) > p) {
    throw ArgumentError("mtry must be in [1, p]");
  }
  if (min_leaf < 1) throw ArgumentError("min_leaf must be >= 1");
  if (max_depth < 0) throw ArgumentError("max_depth must be >= 0");
  if (!(sample_fraction > 0.0) || (!replace && sample_fraction > 1.0)) {
    throw ArgumentError("invalid sample_fraction");
  }
}

ForestParams ForestParams::FromJson(const nlohmann::json& j,
                                    const ForestParams& defaults) {
  ForestParams p = defaults;
  p.n_trees = j.value("n_trees", p.n_trees);
  p.mtry = j.value("mtry", p.mtry);
  p.min_leaf = j.value("min_leaf", p.min_leaf);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.sample_fraction = j.value("sample_fraction", p.sample_fraction);
  p.replace = j.value("replace", p.replace);
  return p;
}

nlohmann::json ForestParams::ToJson() const {
  return {{"n_trees", n_trees},         {"mtry", mtry},
          {"min_leaf", min_leaf},       {"max_depth", max_depth},
          {"sample_fraction", sample_fraction}, {"replace", replace}};
}

// ---------------------------------------------------------------------------
// Tree

const TreeNode& Tree::Leaf(std::span<const double> x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(
        x[static_cast<std::size_t>(node->feature)] <= node->threshold
            ? node->left
            : node->right)];
  }
  return *node;
}

int Tree::Depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int max_depth = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) continue;
    depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
    depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
    max_depth = std::max(max_depth, depth[i] + 1);
  }
  return max_depth;
}

namespace {

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, ForestMode mode,
              int num_classes, const ForestParams& params,
              std::vector<double>* importance)
      : x_(x),
        y_(y),
        mode_(mode),
        num_classes_(num_classes),
        params_(params),
        mtry_(params.ResolveMtry(x.cols())),
        importance_(importance) {}

  Tree Build(std::vector<std::uint32_t> sample, Rng& rng) {
    Tree tree;
    idx_ = std::move(sample);
    struct Pending {
      std::size_t node, begin, end;
      int depth;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack{{0, 0, idx_.size(), 0}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      TreeNode& node = tree.nodes[p.node];
      node.count = static_cast<int>(p.end - p.begin);
      node.value = Payload(p.begin, p.end);

      const bool depth_ok = params_.max_depth == 0 || p.depth < params_.max_depth;
      if (!depth_ok || p.end - p.begin < 2 * static_cast<std::size_t>(params_.min_leaf) ||
          IsPure(p.begin, p.end)) {
        continue;
      }
      const Candidate best = FindSplit(p.begin, p.end, rng);
      if (best.feature < 0) continue;

      const auto f = static_cast<std::size_t>(best.feature);
      auto mid_it = std::partition(
          idx_.begin() + static_cast<std::ptrdiff_t>(p.begin),
          idx_.begin() + static_cast<std::ptrdiff_t>(p.end),
          [&](std::uint32_t i) { return x_(i, f) <= best.threshold; });
      const auto mid = static_cast<std::size_t>(mid_it - idx_.begin());

      if (importance_) (*importance_)[f] += best.gain;
      node.value.clear();  // only leaves carry a payload
      const int left = static_cast<int>(tree.nodes.size());
      // `node` may dangle after emplace_back; write through the index.
      tree.nodes[p.node].feature = best.feature;
      tree.nodes[p.node].threshold = best.threshold;
      tree.nodes[p.node].left = left;
      tree.nodes[p.node].right = left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      // Right first so the left child is expanded first.
      stack.push_back({static_cast<std::size_t>(left + 1), mid, p.end, p.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), p.begin, mid, p.depth + 1});
    }
    return tree;
  }

 private:
  std::vector<double> Payload(std::size_t begin, std::size_t end) const {
    const double n = static_cast<double>(end - begin);
    if (mode_ == ForestMode::kRegression) {
      double s = 0.0;
      for (std::size_t k = begin; k < end; ++k) s += y_[idx_[k]];
      return {s / n};
    }
    std::vector<double> p(static_cast<std::size_t>(num_classes_), 0.0);
    for (std::size_t k = begin; k < end; ++k) {
      p[static_cast<std::size_t>(y_[idx_[k]])] += 1.0;
    }
    for (double& v : p) v /= n;
    return p;
  }

  bool IsPure(std::size_t begin, std::size_t end) const {
    const double first = y_[idx_[begin]];
    for (std::size_t k = begin + 1; k < end; ++k) {
      if (y_[idx_[k]] != first) return false;
    }
    return true;
  }

  Candidate FindSplit(std::size_t begin, std::size_t end, Rng& rng) {
    const std::size_t p = x_.cols();
    features_.resize(p);
    std::iota(features_.begin(), features_.end(), 0);
    for (int k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), p - 1);
      std::swap(features_[static_cast<std::size_t>(k)], features_[pick(rng)]);
    }
    std::sort(features_.begin(), features_.begin() + mtry_);

    Candidate best;
    const std::size_t n = end - begin;
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);
    // Parent statistics.
    double parent_score = 0.0;
    std::vector<double> total_counts;
    double total_sum = 0.0;
    if (mode_ == ForestMode::kRegression) {
      for (std::size_t k = begin; k < end; ++k) total_sum += y_[idx_[k]];
      parent_score = total_sum * total_sum / static_cast<double>(n);
    } else {
      total_counts.assign(static_cast<std::size_t>(num_classes_), 0.0);
      for (std::size_t k = begin; k < end; ++k) {
        total_counts[static_cast<std::size_t>(y_[idx_[k]])] += 1.0;
      }
      for (double c : total_counts) parent_score += c * c;
      parent_score /= static_cast<double>(n);
    }
    const double eps = 1e-12 * std::max(1.0, std::abs(parent_score));

    for (int fi = 0; fi < mtry_; ++fi) {
      const std::size_t f = features_[static_cast<std::size_t>(fi)];
      pairs_.clear();
      for (std::size_t k = begin; k < end; ++k) {
        pairs_.emplace_back(x_(idx_[k], f), y_[idx_[k]]);
      }
      std::sort(pairs_.begin(), pairs_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (pairs_.front().first == pairs_.back().first) continue;

      double left_sum = 0.0;
      left_counts_.assign(total_counts.size(), 0.0);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        if (mode_ == ForestMode::kRegression) {
          left_sum += pairs_[k].second;
        } else {
          left_counts_[static_cast<std::size_t>(pairs_[k].second)] += 1.0;
        }
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        if (pairs_[k].first == pairs_[k + 1].first) continue;

        double score = 0.0;
        if (mode_ == ForestMode::kRegression) {
          const double right_sum = total_sum - left_sum;
          score = left_sum * left_sum / static_cast<double>(nl) +
                  right_sum * right_sum / static_cast<double>(nr);
        } else {
          double sl = 0.0, sr = 0.0;
          for (std::size_t c = 0; c < total_counts.size(); ++c) {
            const double l = left_counts_[c];
            const double r = total_counts[c] - l;
            sl += l * l;
            sr += r * r;
          }
          score = sl / static_cast<double>(nl) + sr / static_cast<double>(nr);
        }
        const double gain = score - parent_score;
        if (gain > eps && gain > best.gain) {
          const double a = pairs_[k].first;
          const double b = pairs_[k + 1].first;
          double thr = a + (b - a) / 2.0;
          if (!(thr < b)) thr = a;
          best = {gain, static_cast<int>(f), thr};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> y_;
  ForestMode mode_;
  int num_classes_;
  const ForestParams& params_;
  int mtry_;
  std::vector<double>* importance_;
  std::vector<std::uint32_t> idx_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, double>> pairs_;
  std::vector<double> left_counts_;
};

}  // namespace

Forest FitForest(const Matrix& x, std::span<const double> y, ForestMode mode,
                 const ForestParams& params, std::uint64_t seed) {
  if (x.rows() != y.size()) throw ArgumentError("X rows and y length differ");
  if (y.size() < 2) throw ArgumentError("forest needs at least 2 rows");
  params.Validate(x.cols());
  for (double v : y) {
    if (!std::isfinite(v)) throw ArgumentError("non-finite target");
  }

  Forest forest;
  forest.mode_ = mode;
  forest.params_ = params;
  forest.num_features_ = x.cols();
  forest.num_rows_ = x.rows();
  forest.seed_ = seed;
  if (mode == ForestMode::kClassification) {
    int max_class = 0;
    for (double v : y) {
      if (v < 0 || v != std::floor(v)) {
        throw ArgumentError("class labels must be non-negative integers");
      }
      max_class = std::max(max_class, static_cast<int>(v));
    }
    forest.num_classes_ = max_class + 1;
    std::vector<int> seen(static_cast<std::size_t>(forest.num_classes_), 0);
    for (double v : y) seen[static_cast<std::size_t>(v)] = 1;
    if (std::count(seen.begin(), seen.end(), 1) < 2) {
      throw ArgumentError("classification needs at least two classes");
    }
  }

  const std::size_t n = x.rows();
  const auto draws = static_cast<std::size_t>(
      std::max(1.0, std::round(params.sample_fraction * static_cast<double>(n))));
  std::vector<double> importance(x.cols(), 0.0);
  TreeBuilder builder(x, y, mode, forest.num_classes_, params, &importance);

  forest.trees_.reserve(static_cast<std::size_t>(params.n_trees));
  forest.oob_.reserve(static_cast<std::size_t>(params.n_trees));
  std::vector<char> in_bag(n);
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(DeriveSeed(seed, {static_cast<std::uint64_t>(t)}));
    std::vector<std::uint32_t> sample;
    sample.reserve(draws);
    std::fill(in_bag.begin(), in_bag.end(), 0);
    if (params.replace) {
      std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
      for (std::size_t d = 0; d < draws; ++d) {
        const auto i = pick(rng);
        sample.push_back(i);
        in_bag[i] = 1;
      }
    } else {
      std::vector<std::uint32_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      std::shuffle(all.begin(), all.end(), rng);
      sample.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(draws, n)));
      for (auto i : sample) in_bag[i] = 1;
    }
    std::vector<std::uint32_t> oob;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (!in_bag[i]) oob.push_back(i);
    }
    forest.trees_.push_back(builder.Build(std::move(sample), rng));
    forest.oob_.push_back(std::move(oob));
  }

  const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (total > 0.0) {
    for (double& v : importance) v /= total;
  }
  forest.gini_importance_ = std::move(importance);
  return forest;
}

void Forest::CheckDimension(std::size_t p) const {
  if (p != num_features_) {
    throw ArgumentError("covariate dimension " + std::to_string(p) +
                        " does not match forest dimension " +
                        std::to_string(num_features_));
  }
}

std::vector<double> Forest::Predict(std::span<const double> x) const {
  CheckDimension(x.size());
  if (trees_.empty()) throw EvaluationError("forest has no trees");
  std::vector<double> acc = trees_.front().Leaf(x).value;
  for (std::size_t t = 1; t < trees_.size(); ++t) {
    const auto& v = trees_[t].Leaf(x).value;
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += v[c];
  }
  for (double& v : acc) v /= static_cast<double>(trees_.size());
  return acc;
}

double Forest::PredictValue(std::span<const double> x) const {
  if (mode_ != ForestMode::kRegression) {
    throw ArgumentError("PredictValue requires a regression forest");
  }
  return Predict(x).front();
}

double Forest::PredictProbability(std::span<const double> x, int cls) const {
  if (mode_ != ForestMode::kClassification || cls < 0 || cls >= num_classes_) {
    throw ArgumentError("invalid class for probability prediction");
  }
  return Predict(x)[static_cast<std::size_t>(cls)];
}

std::vector<std::vector<double>> Forest::PredictOob(const Matrix& x) const {
  CheckDimension(x.cols());
  if (x.rows() != num_rows_) {
    throw ArgumentError("PredictOob requires the training matrix");
  }
  const std::size_t width =
      mode_ == ForestMode::kRegression ? 1 : static_cast<std::size_t>(num_classes_);
  std::vector<std::vector<double>> sum(x.rows(), std::vector<double>(width, 0.0));
  std::vector<int> count(x.rows(), 0);
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    for (std::uint32_t i : oob_[t]) {
      const auto& v = trees_[t].Leaf(x.row(i)).value;
      for (std::size_t c = 0; c < width; ++c) sum[i][c] += v[c];
      ++count[i];
    }
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (count[i] == 0) {
      sum[i] = Predict(x.row(i));
    } else {
      for (double& v : sum[i]) v /= count[i];
    }
  }
  return sum;
}

double Forest::OobError(const Matrix& x, std::span<const double> y) const {
  const auto pred = PredictOob(x);
  double err = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mode_ == ForestMode::kRegression) {
      const double d = pred[i][0] - y[i];
      err += d * d;
    } else {
      const auto cls = std::max_element(pred[i].begin(), pred[i].end()) - pred[i].begin();
      err += static_cast<double>(cls) != y[i] ? 1.0 : 0.0;
    }
  }
  return err / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json Forest::ToJson() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({n.value, n.count});
      } else {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.count});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return {{"format", "itr.forest"},
          {"version", 1},
          {"mode", mode_ == ForestMode::kRegression ? "regression" : "classification"},
          {"num_features", num_features_},
          {"num_rows", num_rows_},
          {"num_classes", num_classes_},
          {"seed", seed_},
          {"params", params_.ToJson()},
          {"gini_importance", gini_importance_},
          {"oob", oob_},
          {"trees", std::move(trees)}};
}

Forest Forest::FromJson(const nlohmann::json& j) {
  if (j.value("format", "") != "itr.forest" || j.value("version", 0) != 1) {
    throw InputError("not a version-1 forest document");
  }
  Forest f;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "regression") {
    f.mode_ = ForestMode::kRegression;
  } else if (mode == "classification") {
    f.mode_ = ForestMode::kClassification;
  } else {
    throw InputError("unknown forest mode: " + mode);
  }
  f.num_features_ = j.at("num_features").get<std::size_t>();
  f.num_rows_ = j.at("num_rows").get<std::size_t>();
  f.num_classes_ = j.at("num_classes").get<int>();
  f.seed_ = j.at("seed").get<std::uint64_t>();
  f.params_ = ForestParams::FromJson(j.at("params"));
  f.gini_importance_ = j.at("gini_importance").get<std::vector<double>>();
  f.oob_ = j.at("oob").get<std::vector<std::vector<std::uint32_t>>>();
  for (const auto& jt : j.at("trees")) {
    Tree tree;
    for (const auto& jn : jt) {
      TreeNode n;
      if (jn.size() == 2) {
        n.value = jn[0].get<std::vector<double>>();
        n.count = jn[1].get<int>();
      } else if (jn.size() == 5) {
        n.feature = jn[0].get<int>();
        n.threshold = jn[1].get<double>();
        n.left = jn[2].get<int>();
        n.right = jn[3].get<int>();
        n.count = jn[4].get<int>();
      } else {
        throw InputError("malformed tree node");
      }
      tree.nodes.push_back(std::move(n));
    }
    if (tree.nodes.empty()) throw InputError("empty tree");
    f.trees_.push_back(std::move(tree));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Propensity

PropensityModel::PropensityModel(Forest forest, double clip)
    : forest_(std::move(forest)), clip_(clip) {
  if (!(clip >= 0.0 && clip < 0.5)) throw ArgumentError("clip must be in [0, 0.5)");
  if (forest_->mode() != ForestMode::kClassification ||
      forest_->num_classes() != 2) {
    throw ArgumentError("propensity model needs a two-class probability forest");
  }
}

PropensityModel PropensityModel::Constant(double prob_plus, double clip) {
  if (!(prob_plus > 0.0 && prob_plus < 1.0)) {
    throw ArgumentError("constant propensity must be in (0, 1)");
  }
  PropensityModel m;
  m.constant_ = prob_plus;
  m.clip_ = clip;
  return m;
}

double PropensityModel::ProbPlus(std::span<const double> x) const {
  const double p = forest_ ? forest_->PredictProbability(x, 1) : constant_;
  return std::clamp(p, clip_, 1.0 - clip_);
}

double PropensityModel::ProbOf(Arm a, std::span<const double> x) const {
  const double p = ProbPlus(x);
  return a == Arm::kPlus ? p : 1.0 - p;
}

std::vector<double> PropensityModel::ReceivedProbabilities(const Cohort& cohort) const {
  std::vector<double> out;
  out.reserve(cohort.size());
  for (const auto& s : cohort.subjects) out.push_back(ProbOf(s.treatment, s.covariates));
  return out;
}

std::vector<double> PropensityModel::TrainingProbabilities(const Cohort& training) const {
  if (!forest_ || forest_->num_training_rows() != training.size()) {
    return ReceivedProbabilities(training);
  }
  const auto oob = forest_->PredictOob(training.Covariates());
  std::vector<double> out;
  out.reserve(training.size());
  for (std::size_t i = 0; i < training.size(); ++i) {
    const double p = std::clamp(oob[i][1], clip_, 1.0 - clip_);
    out.push_back(training.subjects[i].treatment == Arm::kPlus ? p : 1.0 - p);
  }
  return out;
}

nlohmann::json PropensityModel::ToJson() const {
  nlohmann::json j = {{"format", "itr.propensity"}, {"version", 1}, {"clip", clip_}};
  if (forest_) {
    j["forest"] = forest_->ToJson();
  } else {
    j["constant"] = constant_;
  }
  return j;
}

PropensityModel PropensityModel::FromJson(const nlohmann::json& j) {
  if (j.value("format", "") != "itr.propensity") {
    throw InputError("not a propensity document");
  }
  const double clip = j.at("clip").get<double>();
  if (j.contains("forest")) return PropensityModel(Forest::FromJson(j.at("forest")), clip);
  return Constant(j.at("constant").get<double>(), clip);
}

PropensityModel FitPropensity(const Cohort& cohort, const ForestParams& params,
                              std::uint64_t seed, double clip) {
  cohort.RequireBothArms("propensity fit");
  std::vector<double> labels;
  labels.reserve(cohort.size());
  for (const auto& s : cohort.subjects) labels.push_back(ArmIndex(s.treatment));
  return PropensityModel(
      FitForest(cohort.Covariates(), labels, ForestMode::kClassification, params, seed),
      clip);
}

}  // namespace itr
