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

#ifndef ITR_RANDOM_H_
#define ITR_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace itr {

using Rng = std::mt19937_64;

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for a named sub-stream (tree index, fold, stage, ...). The
// result only depends on the master seed and the path, never on the order in
// which sub-streams are consumed.
inline std::uint64_t DeriveSeed(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = SplitMix64(seed);
  for (std::uint64_t p : path) s = SplitMix64(s ^ SplitMix64(p + 1));
  return s;
}

// Stage tags used with DeriveSeed so that the same fold uses identical
// propensity and imputation streams across learners.
enum class Stage : std::uint64_t {
  kFolds = 1,
  kPropensity = 2,
  kImputation = 3,
  kLearner = 4,
  kSelection = 5,
  kImportance = 6,
  kOutcome = 7,
};

inline std::uint64_t DeriveSeed(std::uint64_t seed, Stage stage,
                                std::uint64_t index = 0) {
  return DeriveSeed(seed, {static_cast<std::uint64_t>(stage), index});
}

}  // namespace itr

#endif  // ITR_RANDOM_H_
