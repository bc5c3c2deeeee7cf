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

#ifndef ITR_IMPORTANCE_H_
#define ITR_IMPORTANCE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "itr/cohort.h"
#include "itr/forest.h"

namespace itr {

struct ImportanceScores {
  std::vector<double> importance;  // mean over trees of permuted - baseline
  std::vector<double> se;          // sd over trees / sqrt(trees used)
  int trees_used = 0;
};

// Out-of-bag permutation importance. For each tree and covariate j the
// tree's OOB rows are re-scored with column j shuffled among them; the score
// is the increase in OOB error (misclassification or squared error)
// averaged over trees. Throws EvaluationError if no tree has OOB rows.
ImportanceScores OobPermutationImportance(const Forest& forest, const Matrix& x,
                                          std::span<const double> y,
                                          std::uint64_t seed);

struct VariableSelection {
  std::vector<std::string> selected;  // top m, best first
  std::vector<std::string> names;     // all covariates, schema order
  // [fold][covariate]
  std::vector<std::vector<double>> fold_importance;
  std::vector<std::vector<double>> fold_se;
  std::vector<std::vector<int>> fold_rank;  // 1 = most important
  std::vector<double> mean_importance;
  std::vector<double> mean_rank;
  std::vector<std::size_t> order;  // covariate indices sorted by mean rank
};

// Fits a reward regression forest on the training part of each of `k` folds,
// ranks covariates by OOB permutation importance within the fold, and keeps
// the `m` covariates with the best mean rank (ties: schema order).
VariableSelection SelectTopVariables(const Cohort& cohort, int k, int m,
                                     std::uint64_t seed,
                                     const ForestParams& params = {});

}  // namespace itr

#endif  // ITR_IMPORTANCE_H_
