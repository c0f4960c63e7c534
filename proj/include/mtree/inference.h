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


#ifndef MTREE_INFERENCE_H_
#define MTREE_INFERENCE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtree/corpus.h"
#include "mtree/model.h"

namespace mtree {

// Per-child log probabilities log(max(p, 1e-12)) of one tree node, with
// the softmax taken over its occupied slots.
void node_log_probs(const NodeParams<float>& node, std::span<const std::int32_t> slots,
                    std::span<const double> r, std::span<double> out);

// Input representation: a bag of token ids (classification) or the context
// window, nearest word first (density).
std::vector<double> represent(const Model& model, std::span<const std::int32_t> input);

// Sum of the log child probabilities along the label's path, root first.
// Throws UnknownLabelError.
double log_prob(const Model& model, std::span<const std::int32_t> input, Label label);
double log_prob_at(const Model& model, std::span<const double> r, Label label);

// Label maximizing log_prob, ties to the smaller id. Depth-first search over
// children in descending probability order, cutting any subtree whose prefix
// already scores below the best leaf.
Label predict_top1(const Model& model, std::span<const std::int32_t> input);
Label predict_top1_at(const Model& model, std::span<const double> r);

struct EvalReport {
  std::string metric;
  double value = 0.0;
  std::int64_t count = 0;
  double millis = 0.0;

  // metric=<name> value=<v> n=<n> ms=<ms>
  std::string to_line() const;
  std::string to_json() const;
};

// Fraction of examples whose prediction is one of their labels.
// Throws EmptyInputError.
EvalReport precision_at_1(const Model& model, std::span<const LabeledExample> examples, int threads = 1);

// exp(-mean log p(w_t | context)) with contexts padded per sentence.
// Throws EmptyInputError.
EvalReport perplexity(const Model& model, const std::vector<std::vector<std::int32_t>>& sentences,
                      int threads = 1);

}  // namespace mtree

#endif  // MTREE_INFERENCE_H_
