// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "mtree/objective.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mtree/error.h"

namespace mtree {

namespace {

constexpr double kTolerance = 1e-9;

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

SplitDistribution::SplitDistribution(std::vector<double> q, std::vector<double> conditionals,
                                     int arity)
    : q_(std::move(q)), cond_(std::move(conditionals)), arity_(arity) {
  if (arity_ < 2) throw DimensionError("arity must be at least 2");
  if (q_.empty()) throw DimensionError("split needs at least one label");
  if (cond_.size() != q_.size() * static_cast<std::size_t>(arity_)) {
    throw DimensionError("conditional matrix must be K x M");
  }
  double q_total = 0.0;
  for (double v : q_) {
    if (!(v >= 0.0)) throw DomainError("label proportions must be nonnegative");
    q_total += v;
  }
  if (std::abs(q_total - 1.0) > kTolerance) throw DomainError("label proportions must sum to 1");
  for (std::size_t i = 0; i < q_.size(); ++i) {
    double row = 0.0;
    for (int j = 0; j < arity_; ++j) {
      const double v = cond_[i * arity_ + j];
      if (!(v >= 0.0 && v <= 1.0 + kTolerance)) throw DomainError("conditionals must lie in [0, 1]");
      row += v;
    }
    if (std::abs(row - 1.0) > kTolerance) {
      throw DomainError("conditional row " + std::to_string(i) + " does not sum to 1");
    }
  }
  marginals_.assign(arity_, 0.0);
  for (std::size_t i = 0; i < q_.size(); ++i) {
    for (int j = 0; j < arity_; ++j) marginals_[j] += q_[i] * cond_[i * arity_ + j];
  }
}

double objective_value(const SplitDistribution& split) {
  const int m = split.arity();
  const auto& p = split.marginals();
  double total = 0.0;
  for (int i = 0; i < split.num_labels(); ++i) {
    double row = 0.0;
    for (int j = 0; j < m; ++j) row += std::abs(p[j] - split.conditional(i, j));
    total += split.q()[i] * row;
  }
  return 2.0 / m * total;
}

double objective_max(int arity) {
  if (arity < 2) throw DomainError("arity must be at least 2");
  const double m = arity;
  return 4.0 / m * (1.0 - 1.0 / m);
}

std::vector<double> gradient_p(const SplitDistribution& split) {
  const int m = split.arity();
  const auto& p = split.marginals();
  std::vector<double> grad(split.conditionals().size());
  for (int i = 0; i < split.num_labels(); ++i) {
    const double qi = split.q()[i];
    const double weight = 2.0 / m * qi * (1.0 - qi);
    for (int j = 0; j < m; ++j) grad[i * m + j] = weight * sign(split.conditional(i, j) - p[j]);
  }
  return grad;
}

std::vector<double> gradient_logp(const SplitDistribution& split) {
  std::vector<double> grad = gradient_p(split);
  const auto& cond = split.conditionals();
  for (std::size_t k = 0; k < grad.size(); ++k) grad[k] *= cond[k];
  return grad;
}

double balancedness(const SplitDistribution& split) {
  const auto& p = split.marginals();
  return *std::min_element(p.begin(), p.end());
}

double purity(const SplitDistribution& split) {
  const int m = split.arity();
  double total = 0.0;
  for (int i = 0; i < split.num_labels(); ++i) {
    double row = 0.0;
    for (int j = 0; j < m; ++j) {
      const double v = split.conditional(i, j);
      row += std::min(v, 1.0 - v);
    }
    total += split.q()[i] * row;
  }
  return total / m;
}

SplitQuality split_quality(const SplitDistribution& split) {
  return {objective_value(split), objective_max(split.arity()), balancedness(split), purity(split)};
}

NodeBound boosting_node_bound(double kappa, double gamma, int arity, long long num_labels,
                              bool balanced) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw DomainError("kappa must lie in (0, 1]");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (arity < 2) throw DomainError("arity must be at least 2");
  if (num_labels < 2) throw DomainError("need at least two labels");
  const double m = arity;
  const double spread = balanced ? 1.0 : m * (1.0 - 2.0 * gamma) + 2.0 * gamma;
  const double exponent = 16.0 * spread * (m - 1.0) * std::log(static_cast<double>(num_labels)) /
                          (std::numbers::log2e * m * m * gamma * gamma);
  NodeBound out;
  out.exponent = exponent;
  out.log_bound = exponent * -std::log(kappa);
  out.bound = out.log_bound > std::log(std::numeric_limits<double>::max())
                  ? std::numeric_limits<double>::infinity()
                  : std::exp(out.log_bound);
  return out;
}

}  // namespace mtree
