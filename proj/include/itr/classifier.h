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

// Weighted linear large-margin classifiers used by the outcome-weighted
// learners. Features are standardized internally; the objective is
//
//   (1/n) sum_i w_i L(y_i f(x_i)) + lambda (|beta|^2 + b^2)
//
// with weights rescaled to mean 1, so lambda does not depend on the scale of
// the rewards.

#ifndef ITR_CLASSIFIER_H_
#define ITR_CLASSIFIER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "itr/matrix.h"

namespace itr {

enum class Surrogate {
  kRamp,      // min(1, max(0, 1 - u)), difference of two hinges
  kHinge,     // max(0, 1 - u)
  kLogistic,  // log(1 + exp(-u))
};

struct ClassifierOptions {
  Surrogate surrogate = Surrogate::kRamp;
  double lambda = 0.1;
  int max_dc_iterations = 20;  // ramp only
  double tolerance = 1e-6;     // objective change between outer iterations
  int max_epochs = 1000;       // dual coordinate descent sweeps per convex step
  std::uint64_t seed = 0;      // coordinate order
};

struct ClassifierFit {
  std::vector<double> weights;  // on the original feature scale
  double intercept = 0.0;
  double objective = 0.0;  // surrogate objective in standardized space
  int iterations = 0;      // DC steps (ramp), Newton steps (logistic), 1 (hinge)
  bool converged = true;
};

// labels are +1 / -1, weights non-negative with a positive sum.
ClassifierFit FitWeightedClassifier(const Matrix& features, std::span<const double> labels,
                                    std::span<const double> weights,
                                    const ClassifierOptions& options);

double RampLoss(double margin);

}  // namespace itr

#endif  // ITR_CLASSIFIER_H_
