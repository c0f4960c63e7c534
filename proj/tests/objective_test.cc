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


#include <cmath>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "mtree/error.h"
#include "mtree/objective.h"
#include "support/gradcheck.h"
#include "support/splits.h"

namespace mtree {
namespace {

using boost::multiprecision::cpp_rational;
using testing::balanced_pure_split;
using testing::random_balanced_split;
using testing::random_pure_split;
using testing::random_split;

// J from its definition, summing |p_j - p_{j|i}| over rationals.
cpp_rational rational_objective(const std::vector<cpp_rational>& q,
                                const std::vector<std::vector<cpp_rational>>& rows, int m) {
  std::vector<cpp_rational> marg(m, 0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (int j = 0; j < m; ++j) marg[j] += q[i] * rows[i][j];
  }
  cpp_rational total = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (int j = 0; j < m; ++j) total += q[i] * abs(marg[j] - rows[i][j]);
  }
  return total * 2 / m;
}

double direct_objective(const SplitDistribution& s) {
  const int m = s.arity();
  std::vector<double> marg(m, 0.0);
  for (int i = 0; i < s.num_labels(); ++i) {
    for (int j = 0; j < m; ++j) marg[j] += s.q()[i] * s.conditional(i, j);
  }
  double total = 0.0;
  for (int i = 0; i < s.num_labels(); ++i) {
    for (int j = 0; j < m; ++j) total += s.q()[i] * std::abs(marg[j] - s.conditional(i, j));
  }
  return 2.0 / m * total;
}

TEST(SplitDistribution, RejectsBadInput) {
  EXPECT_THROW(SplitDistribution({0.5, 0.5}, {1, 0, 0}, 2), DimensionError);
  EXPECT_THROW(SplitDistribution({0.6, 0.6}, {1, 0, 0, 1}, 2), DomainError);
  EXPECT_THROW(SplitDistribution({0.5, 0.5}, {0.7, 0.7, 0, 1}, 2), DomainError);
  EXPECT_THROW(SplitDistribution({1.0}, {1.0}, 1), DimensionError);
}

TEST(ObjectiveValue, PureBalancedBinaryIsOne) {
  const SplitDistribution s({0.5, 0.5}, {1, 0, 0, 1}, 2);
  EXPECT_DOUBLE_EQ(objective_value(s), 1.0);
  EXPECT_DOUBLE_EQ(objective_value(s), objective_max(2));
}

TEST(ObjectiveValue, IdenticalRowsGiveZero) {
  const SplitDistribution s({0.2, 0.3, 0.5}, {0.1, 0.6, 0.3, 0.1, 0.6, 0.3, 0.1, 0.6, 0.3}, 3);
  EXPECT_NEAR(objective_value(s), 0.0, 1e-15);
}

TEST(ObjectiveValue, PureUnbalancedTernaryMatchesRational) {
  const std::vector<cpp_rational> q{cpp_rational(1, 2), cpp_rational(3, 10), cpp_rational(1, 5)};
  const std::vector<std::vector<cpp_rational>> rows{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const cpp_rational exact = rational_objective(q, rows, 3);
  EXPECT_EQ(exact, cpp_rational(62, 75));
  const SplitDistribution s({0.5, 0.3, 0.2}, {1, 0, 0, 0, 1, 0, 0, 0, 1}, 3);
  EXPECT_NEAR(objective_value(s), static_cast<double>(exact), 1e-15);
  EXPECT_NEAR(objective_value(s), 0.826667, 1e-6);
  EXPECT_LT(objective_value(s), objective_max(3));
}

TEST(ObjectiveValue, RandomMatchesDirectEvaluation) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_split(2 + t % 9, 2 + t % 4, rng);
    EXPECT_NEAR(objective_value(s), direct_objective(s), 1e-12);
  }
}

TEST(ObjectiveValue, InvariantUnderLabelPermutation) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const int k = 6, m = 3;
    const auto s = random_split(k, m, rng);
    std::vector<int> perm{0, 1, 2, 3, 4, 5};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> q, cond;
    for (int i : perm) {
      q.push_back(s.q()[i]);
      for (int j = 0; j < m; ++j) cond.push_back(s.conditional(i, j));
    }
    EXPECT_NEAR(objective_value(SplitDistribution(q, cond, m)), objective_value(s), 1e-12);
  }
}

TEST(ObjectiveMax, Examples) {
  EXPECT_DOUBLE_EQ(objective_max(2), 1.0);
  EXPECT_DOUBLE_EQ(objective_max(5), 0.64);
  for (int m = 2; m < 200; ++m) EXPECT_GT(objective_max(m), objective_max(m + 1));
}

TEST(Lemmas, BoundsPurityAndBalance) {
  std::mt19937_64 rng(13);
  for (int m : {2, 3, 5}) {
    const double jstar = objective_max(m);
    for (int t = 0; t < 500; ++t) {
      const int k = 2 + t % 9;
      const auto s = random_split(k, m, rng);
      const double j = objective_value(s);
      EXPECT_GE(j, 0.0);
      EXPECT_LE(j, jstar + 1e-12);

      const auto pure = random_pure_split(k, m, rng);
      EXPECT_GE(balancedness(pure), 1.0 / m - std::sqrt(m * (jstar - objective_value(pure))) / 2 - 1e-9);

      if (m == 2) {
        // Binary balanced splits meet the purity bound with equality.
        const auto bal = random_balanced_split(k, m, rng);
        EXPECT_NEAR(purity(bal), (jstar - objective_value(bal)) / 2, 1e-12);
      }
    }
    for (int c = 1; c <= 3; ++c) EXPECT_NEAR(objective_value(balanced_pure_split(c, m)), jstar, 1e-12);
  }
}

TEST(Lemmas, BalancedPurityBoundFailsForTernarySplits) {
  // Perfectly balanced (marginals 1/3) but each label spread over two
  // children: alpha = 1/3 while (J* - J)/2 = 2/9.
  const double h = 0.5, t = 1.0 / 3;
  const SplitDistribution s({t, t, t}, {h, h, 0, h, 0, h, 0, h, h}, 3);
  EXPECT_NEAR(balancedness(s), t, 1e-15);
  EXPECT_NEAR(objective_value(s), 4.0 / 9, 1e-15);
  EXPECT_NEAR(purity(s), 1.0 / 3, 1e-15);
  EXPECT_GT(purity(s), (objective_max(3) - objective_value(s)) / 2);
}

TEST(GradientP, Examples) {
  // q = (0.25, 0.75), label 0 routed to child 0, marginal p_0 = 0.5.
  const SplitDistribution s({0.25, 0.75}, {1, 0, 1.0 / 3, 2.0 / 3}, 2);
  ASSERT_NEAR(s.marginals()[0], 0.5, 1e-15);
  const auto g = gradient_p(s);
  EXPECT_NEAR(g[0], 0.1875, 1e-15);
  EXPECT_NEAR(g[1], -0.1875, 1e-15);
  const auto gl = gradient_logp(s);
  EXPECT_NEAR(gl[0], 0.1875, 1e-15);
  EXPECT_NEAR(gl[1], 0.0, 1e-15);

  const SplitDistribution s2({0.25, 0.75}, {0.8, 0.2, 0.4, 0.6}, 2);
  ASSERT_NEAR(s2.marginals()[0], 0.5, 1e-15);
  EXPECT_NEAR(gradient_logp(s2)[0], 0.15, 1e-15);
}

TEST(GradientP, DegenerateProportionsGiveZeroRow) {
  const SplitDistribution s({1.0, 0.0}, {0.9, 0.1, 0.1, 0.9}, 2);
  for (double g : gradient_p(s)) EXPECT_EQ(g, 0.0);
}

TEST(GradientP, MatchesFiniteDifferencesAwayFromKinks) {
  std::mt19937_64 rng(14);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const auto check = testing::check_split_gradients(random_split(2 + t % 6, 2 + t % 4, rng));
    EXPECT_LE(check.max_rel_error, 1e-4);
    checked += check.checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(Balancedness, Examples) {
  const SplitDistribution uniform({0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}, 2);
  EXPECT_DOUBLE_EQ(balancedness(uniform), 0.5);
  const SplitDistribution skewed({1.0}, {0.9, 0.1}, 2);
  EXPECT_DOUBLE_EQ(balancedness(skewed), 0.1);
  std::mt19937_64 rng(15);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_split(5, 4, rng);
    double low = 1.0;
    for (int j = 0; j < 4; ++j) {
      double p = 0.0;
      for (int i = 0; i < 5; ++i) p += s.q()[i] * s.conditional(i, j);
      low = std::min(low, p);
    }
    EXPECT_NEAR(balancedness(s), low, 1e-14);
  }
}

TEST(Purity, Examples) {
  EXPECT_EQ(purity(balanced_pure_split(2, 3)), 0.0);
  const SplitDistribution half({1.0}, {0.5, 0.5}, 2);
  EXPECT_DOUBLE_EQ(purity(half), 0.5);
  std::mt19937_64 rng(16);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_split(6, 3, rng);
    double a = 0.0;
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 6; ++i) a += s.q()[i] * std::min(s.conditional(i, j), 1 - s.conditional(i, j));
    }
    EXPECT_NEAR(purity(s), a / 3, 1e-14);
  }
}

TEST(BoostingBound, KappaOneIsOne) {
  for (bool balanced : {false, true}) {
    const NodeBound b = boosting_node_bound(1.0, 0.3, 3, 100, balanced);
    EXPECT_EQ(b.bound, 1.0);
  }
}

TEST(BoostingBound, BalancedBinaryExampleMatchesHighPrecision) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big ln2 = boost::multiprecision::log(Big(2));
  const Big log2e = 1 / ln2;
  const Big exponent = Big(16) * 1 * ln2 / (log2e * 4 * Big(0.25));
  const Big bound = boost::multiprecision::pow(Big(2), exponent);
  const NodeBound b = boosting_node_bound(0.5, 0.5, 2, 2, true);
  EXPECT_NEAR(b.exponent, static_cast<double>(exponent), 1e-12);
  EXPECT_NEAR(b.exponent, 7.687, 1e-3);
  EXPECT_NEAR(b.bound, static_cast<double>(bound), 1e-9 * static_cast<double>(bound));
  EXPECT_NEAR(b.bound, 206.1, 0.1);
}

TEST(BoostingBound, Monotone) {
  for (int m : {2, 3, 5}) {
    for (bool balanced : {false, true}) {
      double prev = 0.0;
      for (double kappa : {0.9, 0.5, 0.2, 0.1}) {
        const double lb = boosting_node_bound(kappa, 0.3, m, 50, balanced).log_bound;
        EXPECT_GT(lb, prev);
        prev = lb;
      }
      prev = std::numeric_limits<double>::infinity();
      for (double gamma : {0.05, 0.1, 0.2, 0.4}) {
        const double lb = boosting_node_bound(0.5, gamma, m, 50, balanced).log_bound;
        EXPECT_LT(lb, prev);
        prev = lb;
      }
      prev = 0.0;
      for (long long k : {2, 10, 100, 1000}) {
        const double lb = boosting_node_bound(0.5, 0.3, m, k, balanced).log_bound;
        EXPECT_GT(lb, prev);
        prev = lb;
      }
    }
  }
}

TEST(BoostingBound, OverflowIsInfinite) {
  const NodeBound b = boosting_node_bound(1e-6, 0.01, 2, 1000000, false);
  EXPECT_TRUE(std::isinf(b.bound));
  EXPECT_TRUE(std::isfinite(b.log_bound));
}

TEST(BoostingBound, RejectsBadArguments) {
  EXPECT_THROW(boosting_node_bound(0.0, 0.3, 2, 10, false), DomainError);
  EXPECT_THROW(boosting_node_bound(1.5, 0.3, 2, 10, false), DomainError);
  EXPECT_THROW(boosting_node_bound(0.5, 0.0, 2, 10, false), DomainError);
  EXPECT_THROW(boosting_node_bound(0.5, 0.3, 1, 10, false), DomainError);
  EXPECT_THROW(boosting_node_bound(0.5, 0.3, 2, 1, false), DomainError);
}

}  // namespace
}  // namespace mtree
