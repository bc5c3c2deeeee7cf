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

#include "itr/importance.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itr/errors.h"
#include "itr/random.h"

namespace itr {
namespace {

double RowError(const Forest& forest, const TreeNode& leaf, double y) {
  if (forest.mode() == ForestMode::kRegression) {
    const double d = leaf.value.front() - y;
    return d * d;
  }
  const auto cls = std::max_element(leaf.value.begin(), leaf.value.end()) -
                   leaf.value.begin();
  return static_cast<double>(cls) != y ? 1.0 : 0.0;
}

}  // namespace

ImportanceScores OobPermutationImportance(const Forest& forest, const Matrix& x,
                                          std::span<const double> y,
                                          std::uint64_t seed) {
  if (x.cols() != forest.num_features()) {
    throw ArgumentError("importance: covariate dimension mismatch");
  }
  if (x.rows() != forest.num_training_rows() || y.size() != x.rows()) {
    throw ArgumentError("importance: data must be the forest's training data");
  }
  const std::size_t p = x.cols();
  std::vector<std::vector<double>> deltas(p);
  std::vector<double> row(p);
  int used = 0;
  for (std::size_t t = 0; t < forest.trees().size(); ++t) {
    const auto& oob = forest.oob()[t];
    if (oob.empty()) continue;
    ++used;
    const Tree& tree = forest.trees()[t];
    double base = 0.0;
    for (auto i : oob) base += RowError(forest, tree.Leaf(x.row(i)), y[i]);
    base /= static_cast<double>(oob.size());

    std::vector<std::uint32_t> perm(oob.begin(), oob.end());
    for (std::size_t j = 0; j < p; ++j) {
      Rng rng(DeriveSeed(seed, {t, j}));
      std::copy(oob.begin(), oob.end(), perm.begin());
      std::shuffle(perm.begin(), perm.end(), rng);
      double err = 0.0;
      for (std::size_t k = 0; k < oob.size(); ++k) {
        const auto src = x.row(oob[k]);
        std::copy(src.begin(), src.end(), row.begin());
        row[j] = x(perm[k], j);
        err += RowError(forest, tree.Leaf(row), y[oob[k]]);
      }
      err /= static_cast<double>(oob.size());
      deltas[j].push_back(err - base);
    }
  }
  if (used == 0) throw EvaluationError("no tree has out-of-bag samples");

  ImportanceScores out;
  out.trees_used = used;
  for (std::size_t j = 0; j < p; ++j) {
    const double n = static_cast<double>(deltas[j].size());
    const double mean = std::accumulate(deltas[j].begin(), deltas[j].end(), 0.0) / n;
    double ss = 0.0;
    for (double d : deltas[j]) ss += (d - mean) * (d - mean);
    const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    out.importance.push_back(mean);
    out.se.push_back(sd / std::sqrt(n));
  }
  return out;
}

VariableSelection SelectTopVariables(const Cohort& cohort, int k, int m,
                                     std::uint64_t seed,
                                     const ForestParams& params) {
  const std::size_t p = cohort.num_covariates();
  if (m < 1 || static_cast<std::size_t>(m) > p) {
    throw ArgumentError("m must be in [1, p]");
  }
  const auto folds = KFoldSplit(cohort, k, DeriveSeed(seed, Stage::kSelection));
  const Matrix x = cohort.Covariates();
  const std::vector<double> y = cohort.Rewards();

  VariableSelection sel;
  sel.names = cohort.schema;
  sel.mean_importance.assign(p, 0.0);
  sel.mean_rank.assign(p, 0.0);
  for (int f = 0; f < k; ++f) {
    const auto train = folds.TrainIndices(f);
    const Matrix xf = x.SelectRows(train);
    std::vector<double> yf;
    yf.reserve(train.size());
    for (auto i : train) yf.push_back(y[i]);
    const std::uint64_t fs = DeriveSeed(seed, Stage::kImportance, static_cast<std::uint64_t>(f));
    const Forest forest = FitForest(xf, yf, ForestMode::kRegression, params, fs);
    const ImportanceScores scores = OobPermutationImportance(forest, xf, yf, fs);

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores.importance[a] > scores.importance[b];
    });
    std::vector<int> rank(p);
    for (std::size_t r = 0; r < p; ++r) rank[order[r]] = static_cast<int>(r) + 1;

    for (std::size_t j = 0; j < p; ++j) {
      sel.mean_importance[j] += scores.importance[j] / k;
      sel.mean_rank[j] += static_cast<double>(rank[j]) / k;
    }
    sel.fold_importance.push_back(scores.importance);
    sel.fold_se.push_back(scores.se);
    sel.fold_rank.push_back(std::move(rank));
  }

  sel.order.resize(p);
  std::iota(sel.order.begin(), sel.order.end(), 0);
  std::stable_sort(sel.order.begin(), sel.order.end(), [&](std::size_t a, std::size_t b) {
    return sel.mean_rank[a] < sel.mean_rank[b];
  });
  for (int r = 0; r < m; ++r) sel.selected.push_back(sel.names[sel.order[static_cast<std::size_t>(r)]]);
  return sel;
}

}  // namespace itr
