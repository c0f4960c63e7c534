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


#ifndef MTREE_NODE_STATS_H_
#define MTREE_NODE_STATS_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

#include "mtree/tree.h"

namespace mtree {

// Running sums of child-probability vectors per (node, label): the
// SumProbas / Counts bookkeeping that drives label reassignment.
class NodeStats {
 public:
  struct Entry {
    std::vector<double> sum_probas;
    double count = 0.0;

    bool operator==(const Entry&) const = default;
  };

  NodeStats() = default;
  // `decay` < 1 scales existing sums down before each record at that key.
  explicit NodeStats(double decay) : decay_(decay) {}

  // Throws DimensionError if the arity differs from earlier records and
  // DomainError unless `probs` is a probability vector (sum 1 +- 1e-6).
  void record(NodeId node, Label label, std::span<const double> probs);

  double count(NodeId node, Label label) const;
  // Zero vector of length `arity` when absent.
  std::vector<double> sum_probas(NodeId node, Label label, int arity) const;
  const Entry* find(NodeId node, Label label) const;

  // sum / count. Throws NoDataError when the count is zero.
  std::vector<double> conditional_mean(NodeId node, Label label) const;
  // Count-weighted average of conditional means over `labels`; equals
  // sum_i q_i p_{j|i} with q_i = count_i / total. Throws NoDataError when the
  // total count is zero.
  std::vector<double> marginal_mean(NodeId node, std::span<const Label> labels) const;

  // Pointwise sum; `other` keeps its own records untouched.
  void merge_from(const NodeStats& other);

  // Rekeys node ids: entries at node n move to remap[n]; remap[n] < 0 drops them.
  void remap_nodes(std::span<const NodeId> remap);

  // Exact text form: a header line, then one line per entry with hexfloat
  // sums. Entries are written in (node, label) order.
  void write(std::ostream& out) const;
  // Throws FormatError.
  static NodeStats read(std::istream& in);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  int arity() const { return arity_; }
  double decay() const { return decay_; }

  bool operator==(const NodeStats& other) const { return entries_ == other.entries_; }

 private:
  static std::uint64_t key(NodeId node, Label label) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(node)) << 32) |
           static_cast<std::uint32_t>(label);
  }

  std::unordered_map<std::uint64_t, Entry> entries_;
  int arity_ = 0;
  double decay_ = 1.0;
};

inline NodeStats init_stats() { return NodeStats(); }

NodeStats merge(const NodeStats& a, const NodeStats& b);

}  // namespace mtree

#endif  // MTREE_NODE_STATS_H_
