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

#include "itr/classifier.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "itr/errors.h"
#include "itr/random.h"

namespace itr {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Standardized {
  RowMatrix z;  // standardized features plus a trailing column of ones
  std::vector<double> mean;
  std::vector<double> scale;  // 0 for constant columns
};

Standardized Standardize(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  Standardized s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x(i, j);
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - m) * (x(i, j) - m);
    s.mean[j] = m;
    s.scale[j] = std::sqrt(ss / static_cast<double>(n));
  }
  s.z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          s.scale[j] > 0.0 ? (x(i, j) - s.mean[j]) / s.scale[j] : 0.0;
    }
    s.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = 1.0;
  }
  return s;
}

double Loss(Surrogate s, double u) {
  switch (s) {
    case Surrogate::kRamp:
      return RampLoss(u);
    case Surrogate::kHinge:
      return std::max(0.0, 1.0 - u);
    case Surrogate::kLogistic:
      return u > 0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
  }
  return 0.0;
}

double Objective(Surrogate s, const Eigen::VectorXd& margins, const Eigen::VectorXd& w,
                 const Eigen::VectorXd& v, double lambda) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) sum += w[i] * Loss(s, margins[i]);
  return sum / static_cast<double>(margins.size()) + lambda * v.squaredNorm();
}

// Dual coordinate descent for
//   min 1/2 |v|^2 + sum_i C_i [max(0, 1 - u_i) + c_i u_i],  u_i = y_i v.z_i,
// whose dual variables live in [-c_i C_i, (1 - c_i) C_i]. `alpha` carries
// over between DC steps and is clipped into the new box.
bool SolveDual(const RowMatrix& z, const Eigen::VectorXd& y, const Eigen::VectorXd& cap,
               const std::vector<char>& flipped, Eigen::VectorXd& alpha, Eigen::VectorXd& v,
               int max_epochs, Rng& rng) {
  const Eigen::Index n = z.rows();
  Eigen::VectorXd lo(n), hi(n), q(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lo[i] = flipped[static_cast<std::size_t>(i)] ? -cap[i] : 0.0;
    hi[i] = flipped[static_cast<std::size_t>(i)] ? 0.0 : cap[i];
    alpha[i] = std::clamp(alpha[i], lo[i], hi[i]);
    q[i] = z.row(i).squaredNorm();
  }
  v = z.transpose() * alpha.cwiseProduct(y);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  constexpr double kEps = 0.1;
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i : order) {
      if (q[i] <= 0.0) continue;
      const double g = y[i] * z.row(i).dot(v) - 1.0;
      double pg = g;
      if (alpha[i] <= lo[i]) pg = std::min(g, 0.0);
      if (alpha[i] >= hi[i]) pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double next = std::clamp(alpha[i] - g / q[i], lo[i], hi[i]);
      const double delta = next - alpha[i];
      if (delta != 0.0) {
        alpha[i] = next;
        v.noalias() += (delta * y[i]) * z.row(i).transpose();
      }
    }
    if (pg_max - pg_min < kEps) return true;
  }
  return false;
}

ClassifierFit Finish(const Standardized& s, const Eigen::VectorXd& v) {
  const std::size_t d = s.mean.size();
  ClassifierFit fit;
  fit.weights.assign(d, 0.0);
  fit.intercept = v[static_cast<Eigen::Index>(d)];
  for (std::size_t j = 0; j < d; ++j) {
    if (s.scale[j] <= 0.0) continue;
    const double w = v[static_cast<Eigen::Index>(j)] / s.scale[j];
    fit.weights[j] = w;
    fit.intercept -= w * s.mean[j];
  }
  return fit;
}

ClassifierFit FitLogistic(const Standardized& s, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w, const ClassifierOptions& opt) {
  const RowMatrix& z = s.z;
  const Eigen::Index n = z.rows(), d = z.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd margins = Eigen::VectorXd::Zero(n);
  double obj = Objective(Surrogate::kLogistic, margins, w, v, opt.lambda);
  bool converged = false;
  int it = 0;
  for (; it < 100 && !converged; ++it) {
    Eigen::VectorXd coef(n), curv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(margins[i]));  // sigma(-u)
      coef[i] = -w[i] * y[i] * p * inv_n;
      curv[i] = w[i] * p * (1.0 - p) * inv_n;
    }
    const Eigen::VectorXd grad = z.transpose() * coef + 2.0 * opt.lambda * v;
    Eigen::MatrixXd hess = z.transpose() * curv.asDiagonal() * z;
    hess.diagonal().array() += 2.0 * opt.lambda;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    Eigen::VectorXd next_v;
    Eigen::VectorXd next_margins;
    double next_obj = obj;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      next_v = v - t * step;
      next_margins = (z * next_v).cwiseProduct(y);
      next_obj = Objective(Surrogate::kLogistic, next_margins, w, next_v, opt.lambda);
      if (next_obj <= obj - 1e-4 * t * grad.dot(step)) break;
    }
    if (next_obj > obj) {
      converged = true;
      break;
    }
    converged = obj - next_obj < opt.tolerance || grad.lpNorm<Eigen::Infinity>() < 1e-10;
    v = next_v;
    margins = next_margins;
    obj = next_obj;
  }
  ClassifierFit fit = Finish(s, v);
  fit.objective = obj;
  fit.iterations = it + 1;
  fit.converged = converged;
  return fit;
}

}  // namespace

double RampLoss(double margin) { return std::clamp(1.0 - margin, 0.0, 1.0); }

ClassifierFit FitWeightedClassifier(const Matrix& features, std::span<const double> labels,
                                    std::span<const double> weights,
                                    const ClassifierOptions& options) {
  const std::size_t n = features.rows();
  if (n == 0) throw ArgumentError("classifier: no training rows");
  if (labels.size() != n || weights.size() != n) {
    throw ArgumentError("classifier: labels/weights length mismatch");
  }
  if (!(options.lambda > 0.0)) throw ArgumentError("classifier: lambda must be > 0");
  if (options.max_dc_iterations < 1) throw ArgumentError("classifier: iterations must be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw ArgumentError("classifier: weights must be finite and non-negative");
    }
    if (labels[i] != 1.0 && labels[i] != -1.0) throw ArgumentError("classifier: labels must be +/-1");
    total += weights[i];
  }
  if (!(total > 0.0)) throw DegenerateError("classifier: all weights are zero");

  const Standardized s = Standardize(features);
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::VectorXd y(ni), w(ni);
  const double mean_w = total / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[static_cast<Eigen::Index>(i)] = labels[i];
    w[static_cast<Eigen::Index>(i)] = weights[i] / mean_w;
  }
  if (options.surrogate == Surrogate::kLogistic) return FitLogistic(s, y, w, options);

  Rng rng(options.seed);
  const Eigen::VectorXd cap = w / (2.0 * options.lambda * static_cast<double>(n));
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(ni);
  Eigen::VectorXd v;
  std::vector<char> flipped(n, 0);
  bool cd_ok = SolveDual(s.z, y, cap, flipped, alpha, v, options.max_epochs, rng);
  Eigen::VectorXd margins = (s.z * v).cwiseProduct(y);

  ClassifierFit best = Finish(s, v);
  best.iterations = 1;
  best.converged = cd_ok;
  if (options.surrogate == Surrogate::kHinge) {
    best.objective = Objective(Surrogate::kHinge, margins, w, v, options.lambda);
    return best;
  }

  double obj = Objective(Surrogate::kRamp, margins, w, v, options.lambda);
  best.objective = obj;
  bool converged = false;
  int it = 1;
  for (; it < options.max_dc_iterations; ++it) {
    std::vector<char> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = margins[static_cast<Eigen::Index>(i)] < 0.0;
    if (it > 1 && next == flipped) {
      converged = true;
      break;
    }
    flipped = std::move(next);
    cd_ok = SolveDual(s.z, y, cap, flipped, alpha, v, options.max_epochs, rng);
    margins = (s.z * v).cwiseProduct(y);
    const double next_obj = Objective(Surrogate::kRamp, margins, w, v, options.lambda);
    if (next_obj < best.objective) {
      const double keep = next_obj;
      best = Finish(s, v);
      best.objective = keep;
    }
    const bool small = std::abs(obj - next_obj) < options.tolerance;
    obj = next_obj;
    if (small) {
      converged = true;
      ++it;
      break;
    }
  }
  best.iterations = it;
  best.converged = converged && cd_ok;
  return best;
}

}  // namespace itr
