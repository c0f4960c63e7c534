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


#ifndef MTREE_OBJECTIVE_H_
#define MTREE_OBJECTIVE_H_

#include <span>
#include <vector>

namespace mtree {

// Label proportions q (K), routing conditionals p_{j|i} (K x M, row-major)
// and the derived marginals p_j = sum_i q_i p_{j|i}.
class SplitDistribution {
 public:
  // Throws DimensionError on shape mismatch and DomainError when q or a row
  // of the conditionals is not a probability vector (tolerance 1e-9).
  SplitDistribution(std::vector<double> q, std::vector<double> conditionals, int arity);

  int arity() const { return arity_; }
  int num_labels() const { return static_cast<int>(q_.size()); }
  const std::vector<double>& q() const { return q_; }
  const std::vector<double>& marginals() const { return marginals_; }
  double conditional(int label, int child) const { return cond_[label * arity_ + child]; }
  std::span<const double> conditional_row(int label) const {
    return std::span<const double>(cond_).subspan(static_cast<std::size_t>(label) * arity_, arity_);
  }
  const std::vector<double>& conditionals() const { return cond_; }

 private:
  std::vector<double> q_;
  std::vector<double> cond_;
  std::vector<double> marginals_;
  int arity_;
};

// Node objective J = (2/M) sum_i q_i sum_j |p_j - p_{j|i}|.
double objective_value(const SplitDistribution& split);

// (4/M)(1 - 1/M), the largest attainable J.
double objective_max(int arity);

// K x M row-major matrix of (2/M) q_i (1 - q_i) sign(p_{j|i} - p_j), sign(0) = 0.
std::vector<double> gradient_p(const SplitDistribution& split);

// gradient_p scaled elementwise by p_{j|i}: the step with respect to log p_{j|i}.
std::vector<double> gradient_logp(const SplitDistribution& split);

// min_j p_j.
double balancedness(const SplitDistribution& split);

// (1/M) sum_j sum_i q_i min(p_{j|i}, 1 - p_{j|i}).
double purity(const SplitDistribution& split);

struct SplitQuality {
  double objective;
  double objective_max;
  double balancedness;
  double purity;
};

SplitQuality split_quality(const SplitDistribution& split);

struct NodeBound {
  double exponent;    // multiplies ln(1/kappa)
  double log_bound;   // natural log of the required internal node count
  double bound;       // exp(log_bound); +inf on overflow
};

// Internal nodes sufficient for error <= kappa under the weak hypothesis
// assumption with advantage gamma:
//   (1/kappa)^(16 [M(1-2g) + 2g] (M-1) ln K / (log2(e) M^2 g^2))
// or, for perfectly balanced splits,
//   (1/kappa)^(16 (M-1) ln K / (log2(e) M^2 g^2)).
// gamma is not checked against the data-dependent admissible interval.
// Throws DomainError unless 0 < kappa <= 1, gamma > 0, M >= 2, K >= 2.
NodeBound boosting_node_bound(double kappa, double gamma, int arity, long long num_labels,
                              bool balanced);

}  // namespace mtree

#endif  // MTREE_OBJECTIVE_H_
