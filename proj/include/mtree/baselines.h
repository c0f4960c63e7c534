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


#ifndef MTREE_BASELINES_H_
#define MTREE_BASELINES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mtree/tree.h"

namespace mtree {

// (label, nonnegative weight) pairs; at least one weight must be positive.
using FrequencyTable = std::vector<std::pair<Label, double>>;

// M-ary Huffman tree minimizing sum_i freq_i * depth_i. The symbol set is
// padded with (1 - K) mod (M - 1) zero-weight dummies so that every merge
// takes exactly M items; dummies are pruned from the result. Ties between
// equal weights go to the lower label, then to the earlier merged node.
// Throws EmptyInputError for an empty or all-zero table.
Tree huffman_tree(const FrequencyTable& freqs, int arity);

// Seeded shuffle packed into a balanced tree (see build_initial_tree).
Tree random_tree(std::span<const Label> labels, int arity, std::optional<int> depth_cap,
                 std::uint64_t seed);

// Single internal node with one child per label: the flat softmax.
Tree flat_tree(std::span<const Label> labels);

// sum_i freq_i * depth_i / sum_i freq_i.
double expected_depth(const Tree& tree, const FrequencyTable& freqs);

}  // namespace mtree

#endif  // MTREE_BASELINES_H_
