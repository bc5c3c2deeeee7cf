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

// Closed catalogue of covariate functions used by synthetic scenarios: sums
// of constant, linear, threshold and two-way interaction terms. Covariate
// indices are 0-based.

#ifndef ITR_FUNCTION_H_
#define ITR_FUNCTION_H_

#include <span>
#include <vector>

#include "json.hpp"

namespace itr {

struct Term {
  enum class Kind { kConstant, kLinear, kThreshold, kInteraction };

  Kind kind = Kind::kConstant;
  int index = 0;    // linear, threshold, first interaction factor
  int index2 = 0;   // second interaction factor
  double scale = 1.0;
  double cut = 0.0;  // threshold: scale * 1{x > cut}
  bool sign = false;  // interaction: scale * sign(x_i * x_j) instead of the product

  double Eval(std::span<const double> x) const;
  friend bool operator==(const Term&, const Term&) = default;
};

class CovariateFunction {
 public:
  CovariateFunction() = default;
  explicit CovariateFunction(std::vector<Term> terms) : terms_(std::move(terms)) {}

  static CovariateFunction Constant(double c) {
    return CovariateFunction({Term{Term::Kind::kConstant, 0, 0, c}});
  }

  const std::vector<Term>& terms() const { return terms_; }
  double operator()(std::span<const double> x) const;
  // Largest covariate index referenced, or -1.
  int MaxIndex() const;
  bool IsZero() const;

  // JSON: array of {"type": "constant"|"linear"|"threshold"|"interaction", ...}.
  // Throws SchemaError on unknown types or missing fields.
  static CovariateFunction FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;

  friend bool operator==(const CovariateFunction&, const CovariateFunction&) = default;

 private:
  std::vector<Term> terms_;
};

}  // namespace itr

#endif  // ITR_FUNCTION_H_
