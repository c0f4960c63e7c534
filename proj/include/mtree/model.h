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


#ifndef MTREE_MODEL_H_
#define MTREE_MODEL_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtree/assignment.h"
#include "mtree/baselines.h"
#include "mtree/corpus.h"
#include "mtree/kernels.h"
#include "mtree/node_stats.h"
#include "mtree/tree.h"

namespace mtree {

enum class Mode : std::uint8_t {
  kClassify = 0,
  kDensity = 1,
};

enum class TreeKind {
  kLearned,  // random balanced start, reassigned from node statistics
  kHuffman,  // fixed, from label frequencies
  kRandom,   // fixed, seeded shuffle
  kFlat,     // one node with a child per label
};

const char* mode_name(Mode mode);
const char* tree_kind_name(TreeKind kind);

struct TrainConfig {
  Mode mode = Mode::kClassify;
  TreeKind tree = TreeKind::kLearned;
  int arity = 2;
  std::optional<int> depth_cap;
  int dim = 32;
  double lr = 0.1;
  int epochs = 5;
  // Examples between possible reassignment points.
  int batch = 256;
  // Reassignments over the first half of training (learned trees only).
  int reassign = 50;
  int threads = 1;
  std::uint64_t seed = 1;
  // Context length T (density mode).
  int window = 4;
  bool adagrad = false;
  double stats_decay = 1.0;
  // Gains ranking reassignments; by default dJ/dp in classification mode and
  // dJ/dlog p in density mode.
  std::optional<GradientKind> gains;
  // What node updates ascend. log p_target by default; p_target is the
  // literal classification update and trains poorly once reassignment moves
  // labels away from confidently routed children.
  NodeObjective node_objective = NodeObjective::kLogProbability;

  // Throws DomainError on out-of-range values.
  void check() const;
};

// Tree, representation parameters and per-node softmax parameters.
//
// Classification: inputs are bag-of-words token ids, labels index `labels`.
// Density: inputs are context windows over `words`; every word except <s>
// is a label and labels share ids with words.
struct Model {
  Mode mode = Mode::kClassify;
  int dim = 0;
  int window = 0;  // T; zero in classification mode
  Vocabulary words;
  Vocabulary labels;  // classification only
  Matrix<float> embeddings;               // |V| x d
  std::vector<Matrix<float>> transitions;  // T blocks of d x d
  Tree tree = Tree::single_leaf(2, 0, std::nullopt);
  std::vector<NodeParams<float>> nodes;  // one per internal node
  NodeStats stats;

  int arity() const { return tree.arity(); }
  // The label ids the tree must hold.
  std::vector<Label> label_set() const;
  std::string label_name(Label label) const;
  // -1 when unknown.
  Label label_id(const std::string& name) const;
};

// U uniform in [-1/d, 1/d], node parameters zero, every R_k = I/T.
Model init_model(Mode mode, Vocabulary words, Vocabulary labels, Tree tree, int dim, int window,
                 std::uint64_t seed);

// Installs a rebuilt tree: node parameters and statistics follow their node
// to its new id; nodes new to the tree start at zero.
void install_tree(Model& model, RebuildResult rebuilt);

// Batch indices (0-based) before which a reassignment runs: reassign points
// spread evenly over the first half of `total_batches`.
std::vector<std::int64_t> reassignment_batches(std::int64_t total_batches, int reassign);

// Learning rate after `progress` in [0, 1] of training. Learned trees keep
// the base rate for the first half, then decay linearly; fixed trees decay
// linearly throughout.
double learning_rate(const TrainConfig& config, double progress);

struct TrainReport {
  std::int64_t steps = 0;
  std::int64_t batches = 0;
  int rebuilds = 0;
  // Shape violations found by validate() after each reassignment.
  std::vector<std::size_t> violations;
  double seconds = 0.0;

  std::size_t total_violations() const;
};

struct TrainHooks {
  // Called after each reassignment with the tree installed.
  std::function<void(const Model&, const ValidationReport&)> on_rebuild;
};

// Algorithm 1. Single-threaded runs are bit-reproducible for a fixed seed;
// with threads > 1 workers update shared parameters without locks between
// reassignment points and merge their statistics at each point.
// Throws EmptyInputError on an empty corpus.
Model train(const ClassificationCorpus& corpus, const TrainConfig& config,
            TrainReport* report = nullptr, const TrainHooks* hooks = nullptr);
Model train(const LmCorpus& corpus, const TrainConfig& config, TrainReport* report = nullptr,
            const TrainHooks* hooks = nullptr);

// Continues training `model` (keeping its tree, parameters and statistics);
// the corpus ids must match the model's vocabularies.
Model train_from(Model model, const ClassificationCorpus& corpus, const TrainConfig& config,
                 TrainReport* report = nullptr, const TrainHooks* hooks = nullptr);
Model train_from(Model model, const LmCorpus& corpus, const TrainConfig& config,
                 TrainReport* report = nullptr, const TrainHooks* hooks = nullptr);

// The starting tree for a configuration; `freqs` feeds Huffman trees.
Tree initial_tree(std::span<const Label> labels, const FrequencyTable& freqs,
                  const TrainConfig& config);

}  // namespace mtree

#endif  // MTREE_MODEL_H_
