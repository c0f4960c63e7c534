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


#include "mtree/inference.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "mtree/error.h"

namespace mtree {

namespace {

const double kLogFloor = std::log(1e-12);

struct Search {
  const Model& model;
  std::span<const double> r;
  double best = -std::numeric_limits<double>::infinity();
  Label best_label = -1;

  void visit(NodeId node, double prefix) {
    const int m = model.arity();
    std::vector<double> logp(m);
    node_log_probs(model.nodes[node], model.tree.children(node), r, logp);
    std::vector<int> order(m);
    for (int j = 0; j < m; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return logp[a] > logp[b]; });
    const auto slots = model.tree.children(node);
    for (int j : order) {
      const std::int32_t slot = slots[j];
      if (slot == kEmptySlot) continue;
      const double score = prefix + logp[j];
      // Children come in descending order and every factor is <= 0.
      if (score < best) break;
      if (is_leaf_slot(slot)) {
        const Label label = slot_label(slot);
        if (score > best || label < best_label) {
          best = score;
          best_label = label;
        }
      } else {
        visit(slot, score);
      }
    }
  }
};

std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }

double millis_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(now() - start).count();
}

// Runs fn(begin, end, slot) over contiguous chunks, one per thread.
template <typename Fn>
void parallel_chunks(std::size_t n, int threads, Fn fn) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = n * t / threads;
    const std::size_t end = n * (t + 1) / threads;
    pool.emplace_back([&, begin, end, t] {
      try {
        fn(begin, end, t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void node_log_probs(const NodeParams<float>& node, std::span<const std::int32_t> slots,
                    std::span<const double> r, std::span<double> out) {
  node_logits(node, r, out);
  mask_empty_slots(slots, out);
  log_softmax_inplace(out);
  for (double& x : out) x = std::max(x, kLogFloor);
}

std::vector<double> represent(const Model& model, std::span<const std::int32_t> input) {
  std::vector<double> r(model.dim, 0.0);
  if (model.mode == Mode::kClassify) {
    represent_bow<float>(input, model.embeddings, r);
  } else {
    represent_context<float>(input, model.embeddings, model.transitions, r);
  }
  return r;
}

double log_prob_at(const Model& model, std::span<const double> r, Label label) {
  const Path& path = model.tree.path_of(label);
  std::vector<double> logp(model.arity());
  double total = 0.0;
  for (const PathStep& step : path) {
    node_log_probs(model.nodes[step.node], model.tree.children(step.node), r, logp);
    total += logp[step.child];
  }
  return total;
}

double log_prob(const Model& model, std::span<const std::int32_t> input, Label label) {
  if (!model.tree.contains(label)) {
    throw UnknownLabelError("label " + std::to_string(label) + " is not in the tree");
  }
  return log_prob_at(model, represent(model, input), label);
}

Label predict_top1_at(const Model& model, std::span<const double> r) {
  if (model.tree.num_internal() == 0) return *model.tree.root_leaf();
  Search search{model, r};
  search.visit(0, 0.0);
  return search.best_label;
}

Label predict_top1(const Model& model, std::span<const std::int32_t> input) {
  return predict_top1_at(model, represent(model, input));
}

std::string EvalReport::to_line() const {
  std::ostringstream out;
  out << "metric=" << metric << " value=" << std::setprecision(10) << value << " n=" << count
      << " ms=" << static_cast<std::int64_t>(std::llround(millis));
  return out.str();
}

std::string EvalReport::to_json() const {
  std::ostringstream out;
  out << "{\"metric\":\"" << metric << "\",\"value\":" << std::setprecision(17) << value
      << ",\"n\":" << count << ",\"ms\":" << std::setprecision(6) << millis << "}";
  return out.str();
}

EvalReport precision_at_1(const Model& model, std::span<const LabeledExample> examples, int threads) {
  if (examples.empty()) throw EmptyInputError("precision@1 needs at least one example");
  const auto start = now();
  std::vector<std::int64_t> hits(std::max(threads, 1), 0);
  parallel_chunks(examples.size(), threads, [&](std::size_t begin, std::size_t end, int slot) {
    for (std::size_t i = begin; i < end; ++i) {
      const Label predicted = predict_top1(model, examples[i].tokens);
      const auto& labels = examples[i].labels;
      if (std::find(labels.begin(), labels.end(), predicted) != labels.end()) ++hits[slot];
    }
  });
  std::int64_t total_hits = 0;
  for (auto h : hits) total_hits += h;
  EvalReport report;
  report.metric = "p@1";
  report.count = static_cast<std::int64_t>(examples.size());
  report.value = static_cast<double>(total_hits) / static_cast<double>(report.count);
  report.millis = millis_since(start);
  return report;
}

EvalReport perplexity(const Model& model, const std::vector<std::vector<std::int32_t>>& sentences,
                      int threads) {
  if (model.mode != Mode::kDensity) throw DomainError("perplexity needs a language model");
  const auto start = now();
  const int slots = std::max(threads, 1);
  std::vector<double> sums(slots, 0.0);
  std::vector<std::int64_t> counts(slots, 0);
  parallel_chunks(sentences.size(), threads, [&](std::size_t begin, std::size_t end, int slot) {
    std::vector<std::int32_t> window(model.window);
    for (std::size_t s = begin; s < end; ++s) {
      const auto& sentence = sentences[s];
      for (std::size_t t = 0; t < sentence.size(); ++t) {
        context_window(sentence, t, model.window, window);
        sums[slot] += log_prob(model, window, sentence[t]);
        ++counts[slot];
      }
    }
  });
  double total = 0.0;
  std::int64_t n = 0;
  for (int t = 0; t < slots; ++t) {
    total += sums[t];
    n += counts[t];
  }
  if (n == 0) throw EmptyInputError("perplexity needs at least one token");
  EvalReport report;
  report.metric = "perplexity";
  report.count = n;
  report.value = std::exp(-total / static_cast<double>(n));
  report.millis = millis_since(start);
  return report;
}

}  // namespace mtree
