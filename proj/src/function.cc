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

#include "itr/function.h"

#include <algorithm>
#include <string>

#include "itr/errors.h"

namespace itr {
namespace {

double SignOf(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

int RequireIndex(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("function term lacks '") + key + "'");
  const int v = j.at(key).get<int>();
  if (v < 0) throw SchemaError(std::string("function term '") + key + "' must be >= 0");
  return v;
}

}  // namespace

double Term::Eval(std::span<const double> x) const {
  const auto at = [&](int i) { return x[static_cast<std::size_t>(i)]; };
  switch (kind) {
    case Kind::kConstant:
      return scale;
    case Kind::kLinear:
      return scale * at(index);
    case Kind::kThreshold:
      return at(index) > cut ? scale : 0.0;
    case Kind::kInteraction: {
      const double prod = at(index) * at(index2);
      return scale * (sign ? SignOf(prod) : prod);
    }
  }
  return 0.0;
}

double CovariateFunction::operator()(std::span<const double> x) const {
  if (MaxIndex() >= static_cast<int>(x.size())) {
    throw ArgumentError("function references a covariate beyond the vector");
  }
  double s = 0.0;
  for (const auto& t : terms_) s += t.Eval(x);
  return s;
}

int CovariateFunction::MaxIndex() const {
  int m = -1;
  for (const auto& t : terms_) {
    switch (t.kind) {
      case Term::Kind::kConstant:
        break;
      case Term::Kind::kInteraction:
        m = std::max({m, t.index, t.index2});
        break;
      default:
        m = std::max(m, t.index);
    }
  }
  return m;
}

bool CovariateFunction::IsZero() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.scale == 0.0; });
}

CovariateFunction CovariateFunction::FromJson(const nlohmann::json& j) {
  if (j.is_number()) return Constant(j.get<double>());
  if (!j.is_array()) throw SchemaError("function must be a number or an array of terms");
  std::vector<Term> terms;
  for (const auto& e : j) {
    const std::string type = e.value("type", "");
    Term t;
    t.scale = e.value("scale", 1.0);
    if (type == "constant") {
      t.kind = Term::Kind::kConstant;
      t.scale = e.contains("value") ? e.at("value").get<double>() : t.scale;
    } else if (type == "linear") {
      t.kind = Term::Kind::kLinear;
      t.index = RequireIndex(e, "index");
    } else if (type == "threshold") {
      t.kind = Term::Kind::kThreshold;
      t.index = RequireIndex(e, "index");
      t.cut = e.value("cut", 0.0);
    } else if (type == "interaction") {
      t.kind = Term::Kind::kInteraction;
      t.index = RequireIndex(e, "i");
      t.index2 = RequireIndex(e, "j");
      t.sign = e.value("sign", false);
    } else {
      throw SchemaError("unknown function term type '" + type + "'");
    }
    terms.push_back(t);
  }
  return CovariateFunction(std::move(terms));
}

nlohmann::json CovariateFunction::ToJson() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : terms_) {
    switch (t.kind) {
      case Term::Kind::kConstant:
        out.push_back({{"type", "constant"}, {"value", t.scale}});
        break;
      case Term::Kind::kLinear:
        out.push_back({{"type", "linear"}, {"index", t.index}, {"scale", t.scale}});
        break;
      case Term::Kind::kThreshold:
        out.push_back({{"type", "threshold"},
                       {"index", t.index},
                       {"cut", t.cut},
                       {"scale", t.scale}});
        break;
      case Term::Kind::kInteraction:
        out.push_back({{"type", "interaction"},
                       {"i", t.index},
                       {"j", t.index2},
                       {"scale", t.scale},
                       {"sign", t.sign}});
        break;
    }
  }
  return out;
}

}  // namespace itr
