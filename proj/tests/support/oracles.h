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


#ifndef MTREE_TESTS_SUPPORT_ORACLES_H_
#define MTREE_TESTS_SUPPORT_ORACLES_H_

// Brute-force reference computations, written independently of the library
// code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mtree/inference.h"
#include "mtree/model.h"

namespace mtree::testing {

// Best total gain over every assignment of K labels to M children that a
// well-formed subtree could realize:
//   congruence: every nonempty child of size s needs (1-s) mod (M-1) dummy
//     slots below it, each empty child is one dummy slot, and the total must
//     equal the node's own padding (1-K) mod (M-1);
//   capacity: every child holds at most `capacity` labels.
// Both require at least two nonempty children.
inline double brute_force_best_gain(const std::vector<double>& gains, int k, int m, bool capacity_mode,
                                    std::int64_t capacity) {
  std::vector<int> child(k, 0);
  double best = -std::numeric_limits<double>::infinity();
  const int mod = m - 1;
  const int node_padding = ((1 - k) % mod + mod) % mod;
  while (true) {
    std::vector<int> sizes(m, 0);
    for (int i = 0; i < k; ++i) ++sizes[child[i]];
    int nonempty = 0;
    bool ok = true;
    int dummies = 0;
    for (int j = 0; j < m; ++j) {
      if (sizes[j] > 0) ++nonempty;
      if (capacity_mode) {
        if (sizes[j] > capacity) ok = false;
      } else if (sizes[j] == 0) {
        dummies += 1;
      } else {
        dummies += ((1 - sizes[j]) % mod + mod) % mod;
      }
    }
    if (nonempty < 2) ok = false;
    if (!capacity_mode && dummies != node_padding) ok = false;
    if (ok) {
      double total = 0.0;
      for (int i = 0; i < k; ++i) total += gains[static_cast<std::size_t>(i) * m + child[i]];
      best = std::max(best, total);
    }
    int pos = 0;
    while (pos < k && ++child[pos] == m) child[pos++] = 0;
    if (pos == k) break;
  }
  return best;
}

// Minimum of sum_i f_i d_i over depth vectors satisfying Kraft's inequality
// sum_i M^-d_i <= 1 (exactly the depth profiles of M-ary prefix trees).
inline double brute_force_min_expected_depth(const std::vector<double>& freqs, int m) {
  const int k = static_cast<int>(freqs.size());
  if (k == 1) return 0.0;
  const int max_depth = k - 1;
  std::int64_t scale = 1;
  for (int d = 0; d < max_depth; ++d) scale *= m;
  std::vector<int> depth(k, 1);
  double best = std::numeric_limits<double>::infinity();
  double total_f = 0.0;
  for (double f : freqs) total_f += f;
  while (true) {
    std::int64_t kraft = 0;
    for (int d : depth) {
      std::int64_t unit = 1;
      for (int e = d; e < max_depth; ++e) unit *= m;
      kraft += unit;
    }
    if (kraft <= scale) {
      double cost = 0.0;
      for (int i = 0; i < k; ++i) cost += freqs[i] * depth[i];
      best = std::min(best, cost / total_f);
    }
    int pos = 0;
    while (pos < k && ++depth[pos] > max_depth) depth[pos++] = 1;
    if (pos == k) break;
  }
  return best;
}

// Argmax of log_prob over every label, ties to the smaller id.
inline Label exhaustive_top1(const Model& model, std::span<const double> r) {
  Label best_label = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (Label label : model.tree.labels()) {
    const double lp = log_prob_at(model, r, label);
    if (lp > best) {
      best = lp;
      best_label = label;
    }
  }
  return best_label;
}

// Random parameters for every node and embedding of a model.
inline void randomize(Model& model, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  for (float& x : model.embeddings.data()) x = static_cast<float>(normal(rng));
  for (auto& r : model.transitions) {
    for (float& x : r.data()) x = static_cast<float>(normal(rng));
  }
  for (auto& node : model.nodes) {
    for (float& x : node.weights.data()) x = static_cast<float>(normal(rng));
    for (float& x : node.bias) x = static_cast<float>(normal(rng));
  }
}

// Random probability vector (flat Dirichlet).
inline std::vector<double> random_simplex(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) {
    x = expo(rng);
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

}  // namespace mtree::testing

#endif  // MTREE_TESTS_SUPPORT_ORACLES_H_
