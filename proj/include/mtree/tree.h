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


#ifndef MTREE_TREE_H_
#define MTREE_TREE_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mtree {

using Label = std::int32_t;
using NodeId = std::int32_t;

// Child slot encoding, shared with the on-disk model format: a nonnegative
// value is an internal node id, a negative value is -(label + 1).
inline constexpr std::int32_t kEmptySlot = std::numeric_limits<std::int32_t>::min();

constexpr std::int32_t leaf_slot(Label label) { return -(label + 1); }
constexpr bool is_leaf_slot(std::int32_t slot) { return slot < 0 && slot != kEmptySlot; }
constexpr bool is_node_slot(std::int32_t slot) { return slot >= 0; }
constexpr Label slot_label(std::int32_t slot) { return -slot - 1; }

struct PathStep {
  NodeId node;
  int child;

  bool operator==(const PathStep&) const = default;
};

// Root-to-leaf sequence of (node, child slot) decisions. Empty when the tree
// is a single leaf.
using Path = std::vector<PathStep>;

// Number of empty slots an unconstrained M-ary tree over `num_labels` leaves
// must carry, i.e. (1 - K) mod (M - 1).
int padding_slots(int num_labels, int arity);

// Immutable M-ary label tree. Internal nodes are numbered 0..N-1 with the
// root at 0; every label sits at exactly one leaf.
//
// Without a depth cap the tree is "well-formed": after filling its empty slots
// with dummy leaves every internal node has M children and every subtree
// holds a count congruent to 1 mod (M - 1). With a depth cap D every leaf is
// at depth <= D instead.
class Tree {
 public:
  // Builds from a flat slot array (node n occupies slots[n*M .. n*M+M)).
  // Rejects structural corruption: dangling or shared node ids, cycles,
  // unreachable nodes, repeated or negative labels. Shape constraints are
  // left to validate().
  static Tree from_slots(int arity, std::optional<int> depth_cap,
                         std::vector<std::int32_t> slots);
  static Tree single_leaf(int arity, Label label, std::optional<int> depth_cap);

  int arity() const { return arity_; }
  std::optional<int> depth_cap() const { return depth_cap_; }
  int num_internal() const { return static_cast<int>(depth_.size()); }
  int num_labels() const { return static_cast<int>(labels_.size()); }

  // Sorted ascending.
  const std::vector<Label>& labels() const { return labels_; }
  bool contains(Label label) const;

  // The label sitting at the root when the tree has no internal nodes.
  std::optional<Label> root_leaf() const { return root_leaf_; }

  std::span<const std::int32_t> slots() const { return slots_; }
  std::span<const std::int32_t> children(NodeId node) const;
  int depth(NodeId node) const { return depth_[node]; }
  NodeId parent(NodeId node) const { return parent_[node]; }
  int subtree_size(NodeId node) const { return subtree_size_[node]; }

  // Labels in the subtree of `node`, ascending.
  std::vector<Label> labels_under(NodeId node) const;

  // Throws UnknownLabelError.
  const Path& path_of(Label label) const;

  bool operator==(const Tree& other) const {
    return arity_ == other.arity_ && depth_cap_ == other.depth_cap_ &&
           slots_ == other.slots_ && root_leaf_ == other.root_leaf_;
  }

 private:
  Tree() = default;
  void index();

  int arity_ = 2;
  std::optional<int> depth_cap_;
  std::vector<std::int32_t> slots_;
  std::optional<Label> root_leaf_;

  std::vector<int> depth_;
  std::vector<NodeId> parent_;
  std::vector<int> subtree_size_;
  std::vector<Label> labels_;
  // Indexed by label id; paths_present_ marks ids that are in the tree.
  std::vector<Path> paths_;
  std::vector<bool> paths_present_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  // "ok", or the violations joined by "; ".
  std::string to_string() const;
};

// Never throws; lists every violated shape invariant.
ValidationReport validate(const Tree& tree);

// Random shuffle of `labels` packed into a maximally balanced tree. Any
// padding sits at the root. Throws CapacityError when arity^depth_cap is
// below the label count and EmptyInputError when `labels` is empty.
Tree build_initial_tree(std::span<const Label> labels, int arity,
                        std::optional<int> depth_cap, std::uint64_t seed);

// Balanced packing of labels in the given order (no shuffle).
Tree pack_balanced(std::span<const Label> labels, int arity, std::optional<int> depth_cap);

// One line per internal node:
//   node <id> depth <d> labels <count> top[<k>]: w1 w2 ...
// The top labels are the k smallest label ids under the node; callers number
// labels by descending frequency so these are the most common ones.
void dump_tree(const Tree& tree, int top_k,
               const std::function<std::string(Label)>& label_name, std::ostream& out);

// M^exp saturating at INT64_MAX.
std::int64_t saturating_pow(int base, int exp);

}  // namespace mtree

#endif  // MTREE_TREE_H_
