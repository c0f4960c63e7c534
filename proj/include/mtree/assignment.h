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


#ifndef MTREE_ASSIGNMENT_H_
#define MTREE_ASSIGNMENT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mtree/node_stats.h"
#include "mtree/tree.h"

namespace mtree {

// Which derivative of the node objective ranks (label, child) pairs.
enum class GradientKind {
  kProbability,     // dJ/dp_{j|i}, used for classification
  kLogProbability,  // dJ/dlog p_{j|i}, used for density estimation
};

// Size rule for the children of one node.
struct SizeConstraint {
  enum class Kind { kCongruence, kCapacity };
  Kind kind = Kind::kCongruence;
  // Congruence: empty slots this node's subtree may use, (1 - n) mod (M - 1).
  int padding = 0;
  // Capacity: most labels any child may receive.
  std::int64_t capacity = 0;

  static SizeConstraint congruence(int num_labels, int arity);
  static SizeConstraint capacity_limit(std::int64_t per_child);
};

// Per-child label counts during a greedy assignment, with the "full"
// predicate: a child is full when giving it one more label would leave no
// valid way to place the remaining labels.
class ChildLoads {
 public:
  // Throws InfeasibleError if no valid split of `total` labels exists.
  ChildLoads(int arity, int total, SizeConstraint constraint);

  bool is_full(int child) const;
  void add(int child);

  int remaining() const { return remaining_; }
  const std::vector<int>& sizes() const { return sizes_; }

 private:
  int deficit(int size) const;
  bool feasible_after_add(int child) const;

  int arity_;
  int remaining_;
  SizeConstraint constraint_;
  std::vector<int> sizes_;
  // Congruence: labels still needed to bring every child to a congruent,
  // nonempty size (an empty child counts 1).
  long long deficit_total_ = 0;
  int nonempty_ = 0;
};

// The set of children that may not receive another label, given the current
// sizes and the number of labels still unassigned.
std::vector<int> feasibility_check(std::span<const int> sizes, int remaining, int arity,
                                   SizeConstraint constraint);

struct AssignmentProblem {
  int arity = 2;
  std::vector<Label> labels;
  // |labels| x arity, row-major: first-order gain of sending labels[r] to child j.
  std::vector<double> gains;
  SizeConstraint constraint;
};

struct Assignment {
  // Child index for each entry of problem.labels.
  std::vector<int> child_of;
  // Labels per child, ascending.
  std::vector<std::vector<Label>> children;
  double total_gain = 0.0;
};

// Greedy assignment: repeatedly take the highest-gain (label, child) pair
// whose child is not full; ties go to the smaller label, then the smaller
// child. Labels whose gain row is identically zero carry no preference and
// are placed afterwards, in label order, on the least-loaded open child.
// Throws InfeasibleError when the constraint admits no split.
Assignment assign_labels(const AssignmentProblem& problem);

// Gains for the labels reaching `stats_node`, from accumulated statistics.
// Labels without records get a zero row.
std::vector<double> node_gains(const NodeStats& stats, NodeId stats_node,
                               std::span<const Label> labels, int arity, GradientKind kind);

struct RebuildResult {
  Tree tree;
  // For each node of the new tree, the id of the node at the same position
  // (same chain of child slots from the root) in the previous tree, or -1.
  std::vector<NodeId> previous_id;
};

// Top-down reassignment from the root. Statistics are looked up by the node
// at the same position in `previous` when given, otherwise by the new node
// id. Nodes are numbered breadth-first. With a depth cap the children of a
// node at depth d hold at most M^(D-d-1) labels; otherwise subtrees follow
// the congruence rule.
RebuildResult rebuild_tree(const NodeStats& stats, std::span<const Label> labels, int arity,
                           std::optional<int> depth_cap, GradientKind kind,
                           const Tree* previous = nullptr);

}  // namespace mtree

#endif  // MTREE_ASSIGNMENT_H_
