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


#include "mtree/assignment.h"

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>
#include <tuple>

#include "mtree/error.h"
#include "mtree/objective.h"

namespace mtree {

SizeConstraint SizeConstraint::congruence(int num_labels, int arity) {
  SizeConstraint c;
  c.kind = Kind::kCongruence;
  c.padding = padding_slots(num_labels, arity);
  return c;
}

SizeConstraint SizeConstraint::capacity_limit(std::int64_t per_child) {
  SizeConstraint c;
  c.kind = Kind::kCapacity;
  c.capacity = per_child;
  return c;
}

ChildLoads::ChildLoads(int arity, int total, SizeConstraint constraint)
    : arity_(arity), remaining_(total), constraint_(constraint), sizes_(arity, 0) {
  if (arity < 2) throw DomainError("arity must be at least 2");
  if (total < 2) throw InfeasibleError("a split needs at least two labels");
  if (constraint_.kind == SizeConstraint::Kind::kCapacity) {
    if (constraint_.capacity < 1 ||
        constraint_.capacity < (total + arity - 1) / static_cast<std::int64_t>(arity)) {
      throw InfeasibleError(std::to_string(total) + " labels do not fit in " + std::to_string(arity) +
                            " children of capacity " + std::to_string(constraint_.capacity));
    }
    return;
  }
  const int mod = arity - 1;
  if (constraint_.padding < 0 || constraint_.padding > std::max(0, arity - 2) ||
      (mod > 1 && ((total + constraint_.padding) % mod) != 1 % mod)) {
    throw InfeasibleError("padding " + std::to_string(constraint_.padding) + " cannot complete " +
                          std::to_string(total) + " labels to a congruent split");
  }
  deficit_total_ = arity;
  if (deficit_total_ - remaining_ > constraint_.padding) {
    throw InfeasibleError(std::to_string(total) + " labels cannot fill " + std::to_string(arity) +
                          " children");
  }
}

int ChildLoads::deficit(int size) const {
  if (size == 0) return 1;
  const int mod = arity_ - 1;
  return (((1 - size) % mod) + mod) % mod;
}

bool ChildLoads::feasible_after_add(int child) const {
  const int size = sizes_[child];
  if (constraint_.kind == SizeConstraint::Kind::kCapacity) {
    if (size >= constraint_.capacity) return false;
    const int nonempty = nonempty_ + (size == 0 ? 1 : 0);
    const int reachable = nonempty + std::min(remaining_ - 1, arity_ - nonempty);
    return reachable >= 2;
  }
  const long long after =
      deficit_total_ - deficit(size) + deficit(size + 1) - (remaining_ - 1);
  return after <= constraint_.padding;
}

bool ChildLoads::is_full(int child) const {
  return remaining_ == 0 || !feasible_after_add(child);
}

void ChildLoads::add(int child) {
  if (remaining_ == 0) throw InfeasibleError("no labels left to assign");
  const int size = sizes_[child];
  if (constraint_.kind == SizeConstraint::Kind::kCongruence) {
    deficit_total_ += deficit(size + 1) - deficit(size);
  }
  if (size == 0) ++nonempty_;
  ++sizes_[child];
  --remaining_;
}

std::vector<int> feasibility_check(std::span<const int> sizes, int remaining, int arity,
                                   SizeConstraint constraint) {
  if (static_cast<int>(sizes.size()) != arity) throw DimensionError("one size per child expected");
  const int assigned = std::accumulate(sizes.begin(), sizes.end(), 0);
  ChildLoads loads(arity, assigned + remaining, constraint);
  for (int j = 0; j < arity; ++j) {
    for (int k = 0; k < sizes[j]; ++k) loads.add(j);
  }
  std::vector<int> full;
  for (int j = 0; j < arity; ++j) {
    if (loads.is_full(j)) full.push_back(j);
  }
  return full;
}

Assignment assign_labels(const AssignmentProblem& problem) {
  const int m = problem.arity;
  const int n = static_cast<int>(problem.labels.size());
  if (problem.gains.size() != static_cast<std::size_t>(n) * m) {
    throw DimensionError("gain matrix must be |labels| x arity");
  }
  ChildLoads loads(m, n, problem.constraint);

  Assignment out;
  out.child_of.assign(n, -1);
  std::vector<int> idle_rows;
  std::vector<std::tuple<double, Label, int, int>> pairs;  // (gain, label, child, row)
  pairs.reserve(static_cast<std::size_t>(n) * m);
  for (int r = 0; r < n; ++r) {
    const double* row = &problem.gains[static_cast<std::size_t>(r) * m];
    if (std::all_of(row, row + m, [](double g) { return g == 0.0; })) {
      idle_rows.push_back(r);
      continue;
    }
    for (int j = 0; j < m; ++j) pairs.emplace_back(row[j], problem.labels[r], j, r);
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  // Fullness is monotone, so one pass in descending order reproduces the
  // repeated argmax over unassigned labels and open children.
  for (const auto& [gain, label, child, row] : pairs) {
    if (out.child_of[row] >= 0 || loads.is_full(child)) continue;
    out.child_of[row] = child;
    loads.add(child);
  }
  std::sort(idle_rows.begin(), idle_rows.end(),
            [&](int a, int b) { return problem.labels[a] < problem.labels[b]; });
  for (int r : idle_rows) {
    int best = -1;
    for (int j = 0; j < m; ++j) {
      if (loads.is_full(j)) continue;
      if (best < 0 || loads.sizes()[j] < loads.sizes()[best]) best = j;
    }
    if (best < 0) throw InfeasibleError("every child is full");
    out.child_of[r] = best;
    loads.add(best);
  }

  out.children.assign(m, {});
  for (int r = 0; r < n; ++r) {
    if (out.child_of[r] < 0) throw InfeasibleError("label left unassigned");
    out.children[out.child_of[r]].push_back(problem.labels[r]);
    out.total_gain += problem.gains[static_cast<std::size_t>(r) * m + out.child_of[r]];
  }
  for (auto& c : out.children) std::sort(c.begin(), c.end());
  return out;
}

std::vector<double> node_gains(const NodeStats& stats, NodeId stats_node,
                               std::span<const Label> labels, int arity, GradientKind kind) {
  const std::size_t n = labels.size();
  std::vector<double> gains(n * arity, 0.0);
  if (stats_node < 0) return gains;

  std::vector<std::size_t> active;
  std::vector<double> counts;
  std::vector<double> cond;
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const NodeStats::Entry* e = stats.find(stats_node, labels[r]);
    if (!e || e->count <= 0.0) continue;
    if (e->sum_probas.size() != static_cast<std::size_t>(arity)) {
      throw DimensionError("statistics arity differs from tree arity");
    }
    const double row_sum = std::accumulate(e->sum_probas.begin(), e->sum_probas.end(), 0.0);
    for (double s : e->sum_probas) cond.push_back(s / row_sum);
    active.push_back(r);
    counts.push_back(e->count);
    total += e->count;
  }
  if (active.empty()) return gains;
  std::vector<double> q(counts);
  for (double& v : q) v /= total;
  const SplitDistribution split(std::move(q), std::move(cond), arity);
  const std::vector<double> grad =
      kind == GradientKind::kProbability ? gradient_p(split) : gradient_logp(split);
  for (std::size_t a = 0; a < active.size(); ++a) {
    std::copy_n(grad.begin() + a * arity, arity, gains.begin() + active[a] * arity);
  }
  return gains;
}

RebuildResult rebuild_tree(const NodeStats& stats, std::span<const Label> labels, int arity,
                           std::optional<int> depth_cap, GradientKind kind, const Tree* previous) {
  if (arity < 2) throw DomainError("arity must be at least 2");
  if (labels.empty()) throw EmptyInputError("cannot build a tree over zero labels");
  const int k = static_cast<int>(labels.size());
  if (depth_cap && saturating_pow(arity, *depth_cap) < k) {
    throw CapacityError(std::to_string(arity) + "^" + std::to_string(*depth_cap) + " cannot hold " +
                        std::to_string(k) + " labels");
  }
  if (k == 1) return {Tree::single_leaf(arity, labels[0], depth_cap), {}};

  struct Pending {
    NodeId id;
    NodeId previous;
    int depth;
    std::vector<Label> labels;
  };
  const bool has_previous = previous != nullptr && previous->num_internal() > 0;
  std::vector<std::int32_t> slots(arity, kEmptySlot);
  std::vector<NodeId> previous_id{has_previous ? 0 : -1};
  std::vector<Label> root_labels(labels.begin(), labels.end());
  std::sort(root_labels.begin(), root_labels.end());
  std::deque<Pending> queue;
  queue.push_back({0, has_previous ? 0 : -1, 0, std::move(root_labels)});
  NodeId next_id = 1;

  while (!queue.empty()) {
    Pending cur = std::move(queue.front());
    queue.pop_front();
    const int n = static_cast<int>(cur.labels.size());
    const NodeId stats_key = previous != nullptr ? cur.previous : cur.id;

    AssignmentProblem problem;
    problem.arity = arity;
    problem.labels = cur.labels;
    problem.gains = node_gains(stats, stats_key, cur.labels, arity, kind);
    problem.constraint =
        depth_cap ? SizeConstraint::capacity_limit(saturating_pow(arity, *depth_cap - cur.depth - 1))
                  : SizeConstraint::congruence(n, arity);
    Assignment assignment = assign_labels(problem);

    for (int j = 0; j < arity; ++j) {
      std::vector<Label>& child = assignment.children[j];
      const std::size_t at = static_cast<std::size_t>(cur.id) * arity + j;
      if (child.empty()) continue;
      if (child.size() == 1) {
        slots[at] = leaf_slot(child[0]);
        continue;
      }
      NodeId prev_child = -1;
      if (has_previous && cur.previous >= 0 && j < previous->arity()) {
        const std::int32_t s = previous->children(cur.previous)[j];
        if (is_node_slot(s)) prev_child = s;
      }
      slots[at] = next_id;
      slots.resize(slots.size() + arity, kEmptySlot);
      previous_id.push_back(prev_child);
      queue.push_back({next_id, prev_child, cur.depth + 1, std::move(child)});
      ++next_id;
    }
  }
  return {Tree::from_slots(arity, depth_cap, std::move(slots)), std::move(previous_id)};
}

}  // namespace mtree
