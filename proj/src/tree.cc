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


#include "mtree/tree.h"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>
#include <sstream>

#include "mtree/error.h"

namespace mtree {

int padding_slots(int num_labels, int arity) {
  if (arity <= 2) return 0;
  const int mod = arity - 1;
  return (((1 - num_labels) % mod) + mod) % mod;
}

std::int64_t saturating_pow(int base, int exp) {
  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t result = 1;
  for (int i = 0; i < exp; ++i) {
    if (result > kMax / base) return kMax;
    result *= base;
  }
  return result;
}

Tree Tree::single_leaf(int arity, Label label, std::optional<int> depth_cap) {
  if (arity < 2) throw DomainError("arity must be at least 2");
  if (label < 0) throw FormatError("labels must be nonnegative");
  Tree tree;
  tree.arity_ = arity;
  tree.depth_cap_ = depth_cap;
  tree.root_leaf_ = label;
  tree.index();
  return tree;
}

Tree Tree::from_slots(int arity, std::optional<int> depth_cap, std::vector<std::int32_t> slots) {
  if (arity < 2) throw DomainError("arity must be at least 2");
  if (slots.empty() || slots.size() % static_cast<std::size_t>(arity) != 0) {
    throw FormatError("slot array size must be a positive multiple of the arity");
  }
  Tree tree;
  tree.arity_ = arity;
  tree.depth_cap_ = depth_cap;
  tree.slots_ = std::move(slots);
  tree.index();
  return tree;
}

void Tree::index() {
  const int n = static_cast<int>(slots_.size()) / arity_;
  depth_.assign(n, -1);
  parent_.assign(n, -1);
  subtree_size_.assign(n, 0);
  labels_.clear();
  paths_.clear();
  paths_present_.clear();

  auto add_label = [this](Label label, const Path& path) {
    if (label < 0) throw FormatError("labels must be nonnegative");
    if (static_cast<std::size_t>(label) >= paths_.size()) {
      paths_.resize(label + 1);
      paths_present_.resize(label + 1, false);
    }
    if (paths_present_[label]) {
      throw FormatError("label " + std::to_string(label) + " appears at more than one leaf");
    }
    paths_present_[label] = true;
    paths_[label] = path;
    labels_.push_back(label);
  };

  if (n == 0) {
    if (!root_leaf_) throw FormatError("tree has neither internal nodes nor a root leaf");
    add_label(*root_leaf_, {});
    return;
  }
  root_leaf_.reset();

  // Depth-first walk with an explicit stack; detects sharing and cycles via
  // the visited depth.
  struct Frame {
    NodeId node;
    int next_child;
  };
  std::vector<Frame> stack{{0, 0}};
  Path path;
  depth_[0] = 0;
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_child == arity_) {
      int total = 0;
      for (int j = 0; j < arity_; ++j) {
        const std::int32_t s = slots_[top.node * arity_ + j];
        if (is_leaf_slot(s)) ++total;
        if (is_node_slot(s)) total += subtree_size_[s];
      }
      subtree_size_[top.node] = total;
      stack.pop_back();
      if (!path.empty()) path.pop_back();
      continue;
    }
    const int j = top.next_child++;
    const std::int32_t s = slots_[top.node * arity_ + j];
    if (s == kEmptySlot) continue;
    if (is_leaf_slot(s)) {
      path.push_back({top.node, j});
      add_label(slot_label(s), path);
      path.pop_back();
      continue;
    }
    if (s >= n) throw FormatError("child id " + std::to_string(s) + " out of range");
    if (s == 0 || depth_[s] != -1) {
      throw FormatError("node " + std::to_string(s) + " is reachable more than once");
    }
    depth_[s] = depth_[top.node] + 1;
    parent_[s] = top.node;
    path.push_back({top.node, j});
    stack.push_back({s, 0});
  }
  for (int i = 0; i < n; ++i) {
    if (depth_[i] == -1) throw FormatError("node " + std::to_string(i) + " is unreachable");
  }
  std::sort(labels_.begin(), labels_.end());
}

bool Tree::contains(Label label) const {
  return label >= 0 && static_cast<std::size_t>(label) < paths_present_.size() &&
         paths_present_[label];
}

std::span<const std::int32_t> Tree::children(NodeId node) const {
  return std::span<const std::int32_t>(slots_).subspan(static_cast<std::size_t>(node) * arity_,
                                                       arity_);
}

const Path& Tree::path_of(Label label) const {
  if (!contains(label)) throw UnknownLabelError("label " + std::to_string(label) + " is not in the tree");
  return paths_[label];
}

std::vector<Label> Tree::labels_under(NodeId node) const {
  std::vector<Label> out;
  std::vector<NodeId> stack{node};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    for (std::int32_t s : children(cur)) {
      if (is_leaf_slot(s)) out.push_back(slot_label(s));
      if (is_node_slot(s)) stack.push_back(s);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string ValidationReport::to_string() const {
  if (violations.empty()) return "ok";
  std::string out;
  for (const std::string& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

ValidationReport validate(const Tree& tree) {
  ValidationReport report;
  const int m = tree.arity();
  const int k = tree.num_labels();
  auto violation = [&report](NodeId node, const std::string& what) {
    report.violations.push_back("node " + std::to_string(node) + ": " + what);
  };

  if (k == 0) report.violations.push_back("tree holds no labels");
  if (tree.num_internal() == 0) return report;

  std::vector<int> empties(tree.num_internal(), 0);
  // Children have larger depth; visit deepest first so subtree sums are ready.
  std::vector<NodeId> order(tree.num_internal());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return tree.depth(a) > tree.depth(b); });

  for (NodeId n : order) {
    int occupied = 0;
    int local_empty = 0;
    for (std::int32_t s : tree.children(n)) {
      if (s == kEmptySlot) {
        ++local_empty;
        continue;
      }
      ++occupied;
      if (is_node_slot(s)) empties[n] += empties[s];
    }
    empties[n] += local_empty;
    if (occupied < 2) {
      violation(n, "has " + std::to_string(occupied) + " occupied child slots, need at least 2");
    }
    const int size = tree.subtree_size(n);
    if (!tree.depth_cap()) {
      // With dummy leaves in the empty slots the padded count is always
      // congruent to 1; a subtree may use at most M-2 dummies.
      if (empties[n] > m - 2) {
        violation(n, "subtree holds " + std::to_string(size) +
                         " labels, not congruent to 1 mod " + std::to_string(m - 1) +
                         " (" + std::to_string(empties[n]) + " empty slots, padding allows " +
                         std::to_string(std::max(0, m - 2)) + ")");
      }
    } else {
      const int cap = *tree.depth_cap();
      const int d = tree.depth(n);
      if (d >= cap) {
        violation(n, "internal node at depth " + std::to_string(d) + " puts leaves below depth cap " +
                         std::to_string(cap));
      } else if (size > saturating_pow(m, cap - d)) {
        violation(n, "holds " + std::to_string(size) + " labels at depth " + std::to_string(d) +
                         ", capacity is " + std::to_string(saturating_pow(m, cap - d)));
      }
    }
  }
  if (tree.depth_cap()) {
    for (Label label : tree.labels()) {
      const auto depth = static_cast<int>(tree.path_of(label).size());
      if (depth > *tree.depth_cap()) {
        report.violations.push_back("label " + std::to_string(label) + ": leaf at depth " +
                                    std::to_string(depth) + " exceeds depth cap " +
                                    std::to_string(*tree.depth_cap()));
      }
    }
  }
  return report;
}

namespace {

// Child sizes for a balanced split of `n` labels.
std::vector<int> balanced_sizes(int n, int arity, int padding, bool capped) {
  std::vector<int> sizes(arity, 0);
  if (capped) {
    const int c = std::min(arity, n);
    for (int j = 0; j < c; ++j) sizes[j] = n / c + (j < n % c ? 1 : 0);
    return sizes;
  }
  const int c = arity - padding;
  if (arity == 2) {
    sizes[0] = (n + 1) / 2;
    sizes[1] = n / 2;
    return sizes;
  }
  const int step = arity - 1;
  const int extra = (n - c) / step;
  for (int j = 0; j < c; ++j) sizes[j] = 1 + step * (extra / c + (j < extra % c ? 1 : 0));
  return sizes;
}

}  // namespace

Tree pack_balanced(std::span<const Label> labels, int arity, std::optional<int> depth_cap) {
  if (arity < 2) throw DomainError("arity must be at least 2");
  if (labels.empty()) throw EmptyInputError("cannot build a tree over zero labels");
  const int k = static_cast<int>(labels.size());
  if (depth_cap) {
    if (*depth_cap < 0) throw DomainError("depth cap must be nonnegative");
    if (saturating_pow(arity, *depth_cap) < k) {
      throw CapacityError(std::to_string(arity) + "^" + std::to_string(*depth_cap) +
                          " cannot hold " + std::to_string(k) + " labels");
    }
  }
  if (k == 1) return Tree::single_leaf(arity, labels[0], depth_cap);

  struct Pending {
    NodeId node;
    int begin;
    int end;
    int padding;
  };
  std::vector<std::int32_t> slots(arity, kEmptySlot);
  std::deque<Pending> queue{{0, 0, k, padding_slots(k, arity)}};
  NodeId next_id = 1;
  while (!queue.empty()) {
    const Pending cur = queue.front();
    queue.pop_front();
    const std::vector<int> sizes =
        balanced_sizes(cur.end - cur.begin, arity, depth_cap ? 0 : cur.padding, depth_cap.has_value());
    int offset = cur.begin;
    for (int j = 0; j < arity; ++j) {
      std::int32_t& slot = slots[static_cast<std::size_t>(cur.node) * arity + j];
      if (sizes[j] == 0) continue;
      if (sizes[j] == 1) {
        slot = leaf_slot(labels[offset]);
      } else {
        slot = next_id;
        slots.resize(slots.size() + arity, kEmptySlot);
        queue.push_back({next_id, offset, offset + sizes[j], 0});
        ++next_id;
      }
      offset += sizes[j];
    }
  }
  return Tree::from_slots(arity, depth_cap, std::move(slots));
}

Tree build_initial_tree(std::span<const Label> labels, int arity, std::optional<int> depth_cap,
                        std::uint64_t seed) {
  std::vector<Label> order(labels.begin(), labels.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return pack_balanced(order, arity, depth_cap);
}

void dump_tree(const Tree& tree, int top_k, const std::function<std::string(Label)>& label_name,
               std::ostream& out) {
  for (NodeId n = 0; n < tree.num_internal(); ++n) {
    const std::vector<Label> under = tree.labels_under(n);
    const int shown = std::min<int>(top_k, static_cast<int>(under.size()));
    out << "node " << n << " depth " << tree.depth(n) << " labels " << under.size() << " top["
        << top_k << "]:";
    for (int i = 0; i < shown; ++i) out << ' ' << label_name(under[i]);
    out << '\n';
  }
}

}  // namespace mtree
