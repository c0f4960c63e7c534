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


#include "mtree/baselines.h"

#include <algorithm>
#include <deque>
#include <queue>
#include <string>

#include "mtree/error.h"

namespace mtree {

namespace {

struct Item {
  double weight;
  // Dummies first, then labels by id, then merged nodes by creation order.
  int rank_class;
  long long rank;
  // Leaf slot encoding for labels, kEmptySlot for dummies, or a draft node index.
  std::int32_t payload;
  bool merged;
};

struct ItemGreater {
  bool operator()(const Item& a, const Item& b) const {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.rank_class != b.rank_class) return a.rank_class > b.rank_class;
    return a.rank > b.rank;
  }
};

}  // namespace

Tree huffman_tree(const FrequencyTable& freqs, int arity) {
  if (arity < 2) throw DomainError("arity must be at least 2");
  if (freqs.empty()) throw EmptyInputError("empty frequency table");
  bool any_positive = false;
  for (const auto& [label, w] : freqs) {
    if (!(w >= 0.0)) throw DomainError("frequencies must be nonnegative");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw EmptyInputError("frequency table has no positive entry");
  if (freqs.size() == 1) return Tree::single_leaf(arity, freqs[0].first, std::nullopt);

  std::priority_queue<Item, std::vector<Item>, ItemGreater> heap;
  const int dummies = padding_slots(static_cast<int>(freqs.size()), arity);
  for (int d = 0; d < dummies; ++d) heap.push({0.0, 0, d, kEmptySlot, false});
  for (const auto& [label, w] : freqs) heap.push({w, 1, label, leaf_slot(label), false});

  // Draft nodes are created bottom-up; the last one is the root.
  std::vector<std::vector<std::int32_t>> draft;
  while (heap.size() > 1) {
    std::vector<std::int32_t> node;
    double weight = 0.0;
    for (int j = 0; j < arity && !heap.empty(); ++j) {
      const Item item = heap.top();
      heap.pop();
      weight += item.weight;
      // Draft ids are relabeled breadth-first below.
      node.push_back(item.payload);
    }
    // Dummies never leave a visible slot.
    std::stable_partition(node.begin(), node.end(), [](std::int32_t s) { return s != kEmptySlot; });
    node.resize(arity, kEmptySlot);
    draft.push_back(std::move(node));
    const auto id = static_cast<std::int32_t>(draft.size() - 1);
    heap.push({weight, 2, id, id, true});
  }

  // Breadth-first renumbering from the root.
  const auto root = static_cast<std::int32_t>(draft.size() - 1);
  std::vector<std::int32_t> new_id(draft.size(), -1);
  std::vector<std::int32_t> order{root};
  new_id[root] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::int32_t s : draft[order[head]]) {
      if (is_node_slot(s)) {
        new_id[s] = static_cast<std::int32_t>(order.size());
        order.push_back(s);
      }
    }
  }
  std::vector<std::int32_t> slots;
  slots.reserve(order.size() * arity);
  for (std::int32_t old : order) {
    for (std::int32_t s : draft[old]) slots.push_back(is_node_slot(s) ? new_id[s] : s);
  }
  return Tree::from_slots(arity, std::nullopt, std::move(slots));
}

Tree random_tree(std::span<const Label> labels, int arity, std::optional<int> depth_cap,
                 std::uint64_t seed) {
  return build_initial_tree(labels, arity, depth_cap, seed);
}

Tree flat_tree(std::span<const Label> labels) {
  if (labels.empty()) throw EmptyInputError("cannot build a tree over zero labels");
  const int k = static_cast<int>(labels.size());
  if (k == 1) return Tree::single_leaf(2, labels[0], 1);
  std::vector<std::int32_t> slots;
  slots.reserve(k);
  for (Label label : labels) slots.push_back(leaf_slot(label));
  return Tree::from_slots(k, 1, std::move(slots));
}

double expected_depth(const Tree& tree, const FrequencyTable& freqs) {
  double total = 0.0;
  double weighted = 0.0;
  for (const auto& [label, w] : freqs) {
    total += w;
    weighted += w * static_cast<double>(tree.path_of(label).size());
  }
  if (total <= 0.0) throw EmptyInputError("frequency table has no positive entry");
  return weighted / total;
}

}  // namespace mtree
