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


#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mtree/error.h"
#include "mtree/node_stats.h"
#include "support/oracles.h"

namespace mtree {
namespace {

using testing::random_simplex;

TEST(InitStats, EmptyQueriesAreZero) {
  const NodeStats s = init_stats();
  EXPECT_TRUE(s.empty());
  for (NodeId n = 0; n < 5; ++n) {
    for (Label l = 0; l < 5; ++l) EXPECT_EQ(s.count(n, l), 0.0);
  }
  EXPECT_EQ(s.sum_probas(1, 1, 3), (std::vector<double>{0, 0, 0}));
}

TEST(InitStats, OneRecordCountsOne) {
  NodeStats s = init_stats();
  const std::vector<double> p{0.5, 0.5};
  s.record(0, 3, p);
  EXPECT_EQ(s.count(0, 3), 1.0);
}

TEST(InitStats, SerializationRoundTrip) {
  std::stringstream empty_stream;
  init_stats().write(empty_stream);
  EXPECT_EQ(NodeStats::read(empty_stream), init_stats());

  std::mt19937_64 rng(2);
  NodeStats s;
  for (int i = 0; i < 200; ++i) s.record(static_cast<NodeId>(rng() % 7), static_cast<Label>(rng() % 9), random_simplex(4, rng));
  std::stringstream buf;
  s.write(buf);
  const NodeStats back = NodeStats::read(buf);
  EXPECT_EQ(back, s);
  EXPECT_EQ(back.arity(), 4);
}

TEST(Record, AccumulatesSumsAndCounts) {
  NodeStats s;
  const std::vector<double> p{0.3, 0.7};
  s.record(2, 1, p);
  s.record(2, 1, p);
  EXPECT_EQ(s.count(2, 1), 2.0);
  const auto sum = s.sum_probas(2, 1, 2);
  EXPECT_NEAR(sum[0], 0.6, 1e-15);
  EXPECT_NEAR(sum[1], 1.4, 1e-15);
}

TEST(Record, RejectsNonDistributions) {
  NodeStats s;
  EXPECT_THROW(s.record(0, 0, std::vector<double>{0.25, 0.25}), DomainError);
  EXPECT_THROW(s.record(0, 0, std::vector<double>{1.5, -0.5}), DomainError);
  s.record(0, 0, std::vector<double>{0.5, 0.5});
  EXPECT_THROW(s.record(0, 0, std::vector<double>{0.2, 0.3, 0.5}), DimensionError);
}

TEST(Record, MeanMatchesStreamingOracle) {
  std::mt19937_64 rng(3);
  NodeStats s;
  // Welford-style running mean, independent of the summation in NodeStats.
  std::vector<double> mean(3, 0.0);
  for (int i = 1; i <= 1000; ++i) {
    const auto p = random_simplex(3, rng);
    s.record(4, 2, p);
    for (int j = 0; j < 3; ++j) mean[j] += (p[j] - mean[j]) / i;
  }
  const auto got = s.conditional_mean(4, 2);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(got[j], mean[j], 1e-12);
}

TEST(ConditionalMean, Examples) {
  NodeStats s;
  s.record(0, 0, std::vector<double>{1, 0});
  EXPECT_EQ(s.conditional_mean(0, 0), (std::vector<double>{1, 0}));
  s.record(0, 0, std::vector<double>{0, 1});
  EXPECT_EQ(s.conditional_mean(0, 0), (std::vector<double>{0.5, 0.5}));
  EXPECT_THROW(s.conditional_mean(0, 1), NoDataError);
}

TEST(ConditionalMean, MatchesBruteForceAverageAndIsOrderInvariant) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> stored;
  for (int i = 0; i < 300; ++i) stored.push_back(random_simplex(5, rng));
  NodeStats forward, backward;
  for (const auto& p : stored) forward.record(1, 1, p);
  for (auto it = stored.rbegin(); it != stored.rend(); ++it) backward.record(1, 1, *it);
  const auto a = forward.conditional_mean(1, 1);
  const auto b = backward.conditional_mean(1, 1);
  for (int j = 0; j < 5; ++j) {
    double avg = 0.0;
    for (const auto& p : stored) avg += p[j];
    avg /= stored.size();
    EXPECT_NEAR(a[j], avg, 1e-12);
    EXPECT_NEAR(a[j], b[j], 1e-12);
  }
}

TEST(MarginalMean, Examples) {
  NodeStats s;
  s.record(0, 0, std::vector<double>{1, 0});
  s.record(0, 1, std::vector<double>{0, 1});
  const std::vector<Label> both{0, 1};
  EXPECT_EQ(s.marginal_mean(0, both), (std::vector<double>{0.5, 0.5}));
  s.record(0, 0, std::vector<double>{1, 0});
  s.record(0, 0, std::vector<double>{1, 0});
  EXPECT_EQ(s.marginal_mean(0, both), (std::vector<double>{0.75, 0.25}));
  EXPECT_THROW(s.marginal_mean(1, both), NoDataError);
}

TEST(MarginalMean, EqualsMixtureOfConditionals) {
  std::mt19937_64 rng(6);
  NodeStats s;
  std::vector<Label> labels{0, 1, 2, 3, 4, 5};
  for (int i = 0; i < 500; ++i) s.record(0, labels[rng() % labels.size()], random_simplex(3, rng));
  double total = 0.0;
  for (Label l : labels) total += s.count(0, l);
  std::vector<double> expect(3, 0.0);
  for (Label l : labels) {
    if (s.count(0, l) == 0) continue;
    const auto c = s.conditional_mean(0, l);
    for (int j = 0; j < 3; ++j) expect[j] += s.count(0, l) / total * c[j];
  }
  const auto got = s.marginal_mean(0, labels);
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(got[j], expect[j], 1e-12);
    sum += got[j];
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

NodeStats random_stats(std::mt19937_64& rng, int records) {
  NodeStats s;
  for (int i = 0; i < records; ++i) {
    s.record(static_cast<NodeId>(rng() % 4), static_cast<Label>(rng() % 6), random_simplex(3, rng));
  }
  return s;
}

void expect_close(const NodeStats& a, const NodeStats& b) {
  ASSERT_EQ(a.size(), b.size());
  for (NodeId n = 0; n < 4; ++n) {
    for (Label l = 0; l < 6; ++l) {
      EXPECT_NEAR(a.count(n, l), b.count(n, l), 1e-12);
      const auto sa = a.sum_probas(n, l, 3);
      const auto sb = b.sum_probas(n, l, 3);
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(sa[j], sb[j], 1e-12);
    }
  }
}

TEST(Merge, IdentityCommutativityAssociativity) {
  std::mt19937_64 rng(7);
  const NodeStats a = random_stats(rng, 100);
  const NodeStats b = random_stats(rng, 80);
  const NodeStats c = random_stats(rng, 60);
  EXPECT_EQ(merge(a, init_stats()), a);
  EXPECT_EQ(merge(init_stats(), a), a);
  expect_close(merge(a, b), merge(b, a));
  expect_close(merge(merge(a, b), c), merge(a, merge(b, c)));
}

TEST(Merge, ShardedEqualsSequential) {
  std::mt19937_64 rng(8);
  struct Rec {
    NodeId n;
    Label l;
    std::vector<double> p;
  };
  std::vector<Rec> recs;
  for (int i = 0; i < 400; ++i) {
    recs.push_back({static_cast<NodeId>(rng() % 4), static_cast<Label>(rng() % 6), random_simplex(3, rng)});
  }
  NodeStats sequential;
  std::vector<NodeStats> shards(4);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    sequential.record(recs[i].n, recs[i].l, recs[i].p);
    shards[i % 4].record(recs[i].n, recs[i].l, recs[i].p);
  }
  NodeStats merged;
  for (const auto& s : shards) merged.merge_from(s);
  expect_close(merged, sequential);
}

TEST(Merge, QueriesCommuteWithMerge) {
  std::mt19937_64 rng(9);
  const NodeStats a = random_stats(rng, 100);
  const NodeStats b = random_stats(rng, 100);
  const NodeStats m = merge(a, b);
  for (NodeId n = 0; n < 4; ++n) {
    for (Label l = 0; l < 6; ++l) {
      EXPECT_NEAR(m.count(n, l), a.count(n, l) + b.count(n, l), 1e-12);
      const auto sa = a.sum_probas(n, l, 3), sb = b.sum_probas(n, l, 3), sm = m.sum_probas(n, l, 3);
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(sm[j], sa[j] + sb[j], 1e-12);
    }
  }
}

TEST(NodeStatsInvariants, SumsStayWithinCount) {
  std::mt19937_64 rng(10);
  NodeStats s = random_stats(rng, 1000);
  for (NodeId n = 0; n < 4; ++n) {
    for (Label l = 0; l < 6; ++l) {
      const NodeStats::Entry* e = s.find(n, l);
      if (!e) continue;
      double total = 0.0;
      for (double v : e->sum_probas) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, e->count);
        total += v;
      }
      EXPECT_NEAR(total, e->count, 1e-6 * e->count);
    }
  }
}

TEST(RemapNodes, MovesAndDrops) {
  NodeStats s;
  s.record(0, 1, std::vector<double>{1, 0});
  s.record(1, 1, std::vector<double>{0, 1});
  s.record(2, 1, std::vector<double>{0.5, 0.5});
  const std::vector<NodeId> remap{0, 2, -1};
  s.remap_nodes(remap);
  EXPECT_EQ(s.conditional_mean(0, 1), (std::vector<double>{1, 0}));
  EXPECT_EQ(s.conditional_mean(2, 1), (std::vector<double>{0, 1}));
  EXPECT_EQ(s.count(1, 1), 0.0);
  EXPECT_EQ(s.size(), 2u);
}

TEST(Decay, ScalesHistory) {
  NodeStats s(0.5);
  s.record(0, 0, std::vector<double>{1, 0});
  s.record(0, 0, std::vector<double>{0, 1});
  EXPECT_DOUBLE_EQ(s.count(0, 0), 1.5);
  EXPECT_EQ(s.sum_probas(0, 0, 2), (std::vector<double>{0.5, 1.0}));
}

}  // namespace
}  // namespace mtree
