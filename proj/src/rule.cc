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

#include "itr/rule.h"

#include <cmath>
#include <fstream>

#include "itr/errors.h"

namespace itr {

std::size_t BasisSize(std::size_t p, Basis basis) {
  return basis == Basis::kLinear ? p : p + p * (p - 1) / 2 + p;
}

std::vector<double> ExpandBasis(std::span<const double> x, Basis basis) {
  std::vector<double> out(x.begin(), x.end());
  if (basis == Basis::kQuadratic) {
    const std::size_t p = x.size();
    out.reserve(BasisSize(p, basis));
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) out.push_back(x[i] * x[j]);
    }
    for (std::size_t i = 0; i < p; ++i) out.push_back(x[i] * x[i]);
  }
  return out;
}

Matrix ExpandBasis(const Matrix& x, Basis basis) {
  if (basis == Basis::kLinear) return x;
  Matrix out(x.rows(), BasisSize(x.cols(), basis));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = ExpandBasis(x.row(i), basis);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

const char* BasisName(Basis basis) {
  return basis == Basis::kLinear ? "linear" : "quadratic";
}

Basis ParseBasis(const std::string& name) {
  if (name == "linear") return Basis::kLinear;
  if (name == "quadratic") return Basis::kQuadratic;
  throw ArgumentError("unknown basis '" + name + "' (linear, quadratic)");
}

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void CheckDim(std::size_t want, std::size_t got) {
  if (want != got) {
    throw ArgumentError("rule expects " + std::to_string(want) +
                        " covariates, got " + std::to_string(got));
  }
}

Arm ArmFromJson(const nlohmann::json& j) { return ArmFromInt(j.get<int>()); }

}  // namespace

std::string TreatmentRule::kind() const {
  return std::visit(Overloaded{
                        [](const UniversalRule&) { return "universal"; },
                        [](const LinearRule&) { return "linear"; },
                        [](const PairedForestRule&) { return "paired-forest"; },
                        [](const StratumLookupRule&) { return "stratum-lookup"; },
                        [](const ContrastRule&) { return "contrast"; },
                    },
                    v_);
}

Arm TreatmentRule::Apply(std::span<const double> x) const {
  return std::visit(
      Overloaded{
          [](const UniversalRule& r) { return r.arm; },
          [&](const LinearRule& r) {
            CheckDim(r.num_features, x.size());
            const auto phi = ExpandBasis(x, r.basis);
            double s = r.intercept;
            for (std::size_t k = 0; k < phi.size(); ++k) s += r.weights[k] * phi[k];
            return s > 0.0 ? Arm::kPlus : (s < 0.0 ? Arm::kMinus : r.tie);
          },
          [&](const PairedForestRule& r) {
            CheckDim(r.plus.num_features(), x.size());
            const double plus = r.plus.PredictValue(x);
            const double minus = r.minus.PredictValue(x);
            return plus > minus ? Arm::kPlus : (plus < minus ? Arm::kMinus : r.tie);
          },
          [&](const StratumLookupRule& r) {
            if (x.size() < r.num_modifiers) CheckDim(r.num_modifiers, x.size());
            std::vector<int> levels;
            for (std::size_t k = 0; k < r.num_modifiers; ++k) {
              levels.push_back(static_cast<int>(std::lround(x[k])));
            }
            auto it = r.table.find(levels);
            if (it == r.table.end()) throw ArgumentError("stratum not covered by rule");
            return it->second;
          },
          [&](const ContrastRule& r) {
            const double s = r.contrast(x);
            return s > 0.0 ? Arm::kPlus : (s < 0.0 ? Arm::kMinus : r.tie);
          },
      },
      v_);
}

std::vector<Arm> TreatmentRule::ApplyAll(const Cohort& cohort) const {
  std::vector<Arm> out;
  out.reserve(cohort.size());
  for (const auto& s : cohort.subjects) out.push_back(Apply(s.covariates));
  return out;
}

std::vector<Arm> TreatmentRule::ApplyAll(const Matrix& x) const {
  std::vector<Arm> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(Apply(x.row(i)));
  return out;
}

nlohmann::json TreatmentRule::ToJson() const {
  nlohmann::json j = {{"format", "itr.rule"}, {"version", 1}, {"variant", kind()}};
  std::visit(Overloaded{
                 [&](const UniversalRule& r) { j["arm"] = ToInt(r.arm); },
                 [&](const LinearRule& r) {
                   j["num_features"] = r.num_features;
                   j["basis"] = BasisName(r.basis);
                   j["weights"] = r.weights;
                   j["intercept"] = r.intercept;
                   j["tie"] = ToInt(r.tie);
                 },
                 [&](const PairedForestRule& r) {
                   j["forest_minus"] = r.minus.ToJson();
                   j["forest_plus"] = r.plus.ToJson();
                   j["tie"] = ToInt(r.tie);
                 },
                 [&](const StratumLookupRule& r) {
                   j["num_modifiers"] = r.num_modifiers;
                   nlohmann::json cells = nlohmann::json::array();
                   for (const auto& [levels, arm] : r.table) {
                     cells.push_back({{"levels", levels}, {"arm", ToInt(arm)}});
                   }
                   j["table"] = cells;
                 },
                 [&](const ContrastRule& r) {
                   j["contrast"] = r.contrast.ToJson();
                   j["tie"] = ToInt(r.tie);
                 },
             },
             v_);
  return j;
}

TreatmentRule TreatmentRule::FromJson(const nlohmann::json& j) {
  if (j.value("format", "") != "itr.rule") throw InputError("not a treatment rule document");
  if (j.value("version", 0) != 1) throw InputError("unsupported rule version");
  try {
    const std::string v = j.at("variant").get<std::string>();
    if (v == "universal") return Universal(ArmFromJson(j.at("arm")));
    if (v == "linear") {
      LinearRule r;
      r.num_features = j.at("num_features").get<std::size_t>();
      r.basis = ParseBasis(j.at("basis").get<std::string>());
      r.weights = j.at("weights").get<std::vector<double>>();
      r.intercept = j.at("intercept").get<double>();
      r.tie = ArmFromJson(j.at("tie"));
      if (r.weights.size() != BasisSize(r.num_features, r.basis)) {
        throw InputError("linear rule: weight count does not match the basis");
      }
      return TreatmentRule(std::move(r));
    }
    if (v == "paired-forest") {
      return TreatmentRule(PairedForestRule{Forest::FromJson(j.at("forest_minus")),
                                            Forest::FromJson(j.at("forest_plus")),
                                            ArmFromJson(j.at("tie"))});
    }
    if (v == "stratum-lookup") {
      StratumLookupRule r;
      r.num_modifiers = j.at("num_modifiers").get<std::size_t>();
      for (const auto& c : j.at("table")) {
        r.table[c.at("levels").get<std::vector<int>>()] = ArmFromJson(c.at("arm"));
      }
      return TreatmentRule(std::move(r));
    }
    if (v == "contrast") {
      return TreatmentRule(ContrastRule{CovariateFunction::FromJson(j.at("contrast")),
                                        ArmFromJson(j.at("tie"))});
    }
    throw InputError("unknown rule variant '" + v + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed rule document: ") + e.what());
  }
}

void SaveRule(const std::string& path, const TreatmentRule& rule) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << rule.ToJson().dump(1) << '\n';
}

TreatmentRule LoadRule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return TreatmentRule::FromJson(j);
}

}  // namespace itr
