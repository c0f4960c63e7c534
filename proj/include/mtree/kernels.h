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


#ifndef MTREE_KERNELS_H_
#define MTREE_KERNELS_H_

// Dense kernels shared by training and inference. Parameters are stored as
// T (float in models, double in gradient checks); all arithmetic and every
// intermediate vector is double.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mtree/error.h"
#include "mtree/tree.h"

namespace mtree {

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<T> row(int r) {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(r) * cols_, cols_);
  }
  std::span<const T> row(int r) const {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(r) * cols_, cols_);
  }
  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  T operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// One M-way softmax decision function: logits = W r + b.
template <typename T>
struct NodeParams {
  Matrix<T> weights;  // M x d
  std::vector<T> bias;

  NodeParams() = default;
  NodeParams(int arity, int dim) : weights(arity, dim), bias(arity, T{}) {}
  int arity() const { return weights.rows(); }

  bool operator==(const NodeParams&) const = default;
};

// What a node's update ascends.
enum class NodeObjective {
  kProbability,     // p_target (classification)
  kLogProbability,  // log p_target (density estimation)
};

// Plain SGD by default; with `accum` set, per-coordinate Adagrad scaling.
struct StepRule {
  double lr = 0.0;
  bool adagrad = false;
};

inline constexpr double kAdagradEpsilon = 1e-8;

template <typename T>
inline void ascend(T& param, double grad, const StepRule& rule, T* accum) {
  if (rule.adagrad && accum != nullptr) {
    *accum = static_cast<T>(static_cast<double>(*accum) + grad * grad);
    param = static_cast<T>(static_cast<double>(param) +
                           rule.lr * grad / (std::sqrt(static_cast<double>(*accum)) + kAdagradEpsilon));
  } else {
    param = static_cast<T>(static_cast<double>(param) + rule.lr * grad);
  }
}

// Sum of the embedding rows of in-vocabulary tokens; ids outside
// [0, rows) are skipped.
template <typename T>
void represent_bow(std::span<const std::int32_t> tokens, const Matrix<T>& emb, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::int32_t w : tokens) {
    if (w < 0 || w >= emb.rows()) continue;
    const auto row = emb.row(w);
    for (std::size_t a = 0; a < out.size(); ++a) out[a] += static_cast<double>(row[a]);
  }
}

// r = sum_k R_k U_{window[k]}, where window[k] is the word k+1 positions back.
template <typename T>
void represent_context(std::span<const std::int32_t> window, const Matrix<T>& emb,
                       const std::vector<Matrix<T>>& transitions, std::span<double> out) {
  if (window.size() != transitions.size()) {
    throw DimensionError("context window holds " + std::to_string(window.size()) +
                         " words, model expects " + std::to_string(transitions.size()));
  }
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t d = out.size();
  for (std::size_t k = 0; k < window.size(); ++k) {
    const std::int32_t w = window[k];
    if (w < 0 || w >= emb.rows()) continue;
    const auto u = emb.row(w);
    const Matrix<T>& rk = transitions[k];
    for (std::size_t a = 0; a < d; ++a) {
      const auto ra = rk.row(static_cast<int>(a));
      double acc = 0.0;
      for (std::size_t b = 0; b < d; ++b) acc += static_cast<double>(ra[b]) * static_cast<double>(u[b]);
      out[a] += acc;
    }
  }
}

template <typename T>
void node_logits(const NodeParams<T>& node, std::span<const double> r, std::span<double> logits) {
  const int m = node.arity();
  for (int j = 0; j < m; ++j) {
    const auto wj = node.weights.row(j);
    double acc = static_cast<double>(node.bias[j]);
    for (std::size_t a = 0; a < r.size(); ++a) acc += static_cast<double>(wj[a]) * r[a];
    logits[j] = acc;
  }
}

inline void softmax_inplace(std::span<double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double& x : v) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : v) x /= total;
}

inline void log_softmax_inplace(std::span<double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double x : v) total += std::exp(x - top);
  const double lse = top + std::log(total);
  for (double& x : v) x -= lse;
}

// softmax(W r + b).
template <typename T>
void node_forward(const NodeParams<T>& node, std::span<const double> r, std::span<double> probs) {
  node_logits(node, r, probs);
  softmax_inplace(probs);
}

// Empty child slots get logit -inf.
inline void mask_empty_slots(std::span<const std::int32_t> slots, std::span<double> logits) {
  for (std::size_t j = 0; j < slots.size(); ++j) {
    if (slots[j] == kEmptySlot) logits[j] = -std::numeric_limits<double>::infinity();
  }
}

// Softmax over the occupied slots of a tree node; empty slots get
// probability 0.
template <typename T>
void node_forward(const NodeParams<T>& node, std::span<const double> r, std::span<const std::int32_t> slots,
                  std::span<double> probs) {
  node_logits(node, r, probs);
  mask_empty_slots(slots, probs);
  softmax_inplace(probs);
}

// Gradient of the node objective with respect to the logits, given the
// forward probabilities:
//   p_target:      p_t (1[k = t] - p_k)
//   log p_target:  1[k = t] - p_k
inline void objective_logit_gradient(std::span<const double> probs, int target, NodeObjective objective,
                                     std::span<double> grad) {
  const double scale = objective == NodeObjective::kProbability ? probs[target] : 1.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    grad[k] = scale * ((static_cast<int>(k) == target ? 1.0 : 0.0) - probs[k]);
  }
}

// Ascends the node objective for `target`: adds d(objective)/dr to `grad_r`
// (computed with the weights before the update) and steps the node
// parameters. `probs` must be node_forward(node, r). `accum`, when given,
// holds Adagrad accumulators shaped like `node`.
template <typename T>
void node_backward(NodeParams<T>& node, std::span<const double> r, std::span<const double> probs,
                   int target, NodeObjective objective, const StepRule& rule, std::span<double> grad_r,
                   NodeParams<T>* accum = nullptr) {
  const int m = node.arity();
  if (target < 0 || target >= m) {
    throw DimensionError("target child " + std::to_string(target) + " outside [0, " +
                         std::to_string(m) + ")");
  }
  double grad_stack[64];
  std::vector<double> grad_heap;
  std::span<double> g;
  if (m <= 64) {
    g = std::span<double>(grad_stack, m);
  } else {
    grad_heap.resize(m);
    g = grad_heap;
  }
  objective_logit_gradient(probs, target, objective, g);
  const std::size_t d = r.size();
  for (int j = 0; j < m; ++j) {
    const double gj = g[j];
    if (gj == 0.0) continue;
    auto wj = node.weights.row(j);
    for (std::size_t a = 0; a < d; ++a) grad_r[a] += gj * static_cast<double>(wj[a]);
    T* acc_row = accum ? accum->weights.row(j).data() : nullptr;
    for (std::size_t a = 0; a < d; ++a) ascend(wj[a], gj * r[a], rule, acc_row ? acc_row + a : nullptr);
    ascend(node.bias[j], gj, rule, accum ? &accum->bias[j] : nullptr);
  }
}

// Convenience forms that run the forward pass themselves.
template <typename T>
void node_backward(NodeParams<T>& node, std::span<const double> r, int target, NodeObjective objective,
                   const StepRule& rule, std::span<double> grad_r) {
  std::vector<double> probs(node.arity());
  node_forward(node, r, probs);
  node_backward(node, r, probs, target, objective, rule, grad_r);
}

template <typename T>
void node_backward(NodeParams<T>& node, std::span<const double> r, std::span<const std::int32_t> slots,
                   int target, NodeObjective objective, const StepRule& rule, std::span<double> grad_r) {
  std::vector<double> probs(node.arity());
  node_forward(node, r, slots, probs);
  node_backward(node, r, probs, target, objective, rule, grad_r);
}

// Steps every in-vocabulary token embedding along `delta` (the gradient
// with respect to the bag-of-words sum).
template <typename T>
void bow_backward(std::span<const std::int32_t> tokens, std::span<const double> delta,
                  const StepRule& rule, Matrix<T>& emb, Matrix<T>* accum = nullptr) {
  for (std::int32_t w : tokens) {
    if (w < 0 || w >= emb.rows()) continue;
    auto row = emb.row(w);
    T* acc = accum ? accum->row(w).data() : nullptr;
    for (std::size_t a = 0; a < delta.size(); ++a) ascend(row[a], delta[a], rule, acc ? acc + a : nullptr);
  }
}

// For r = sum_k R_k U_{w_k}: dR_k = delta U_{w_k}^T and dU_{w_k} = R_k^T delta.
// All gradients are formed from the pre-update parameters before any step.
template <typename T>
void context_backward(std::span<const std::int32_t> window, std::span<const double> delta,
                      const StepRule& rule, Matrix<T>& emb, std::vector<Matrix<T>>& transitions,
                      Matrix<T>* emb_accum = nullptr, std::vector<Matrix<T>>* transition_accum = nullptr) {
  const std::size_t d = delta.size();
  std::vector<double> emb_grad(window.size() * d, 0.0);
  for (std::size_t k = 0; k < window.size(); ++k) {
    const std::int32_t w = window[k];
    if (w < 0 || w >= emb.rows()) continue;
    const Matrix<T>& rk = transitions[k];
    for (std::size_t a = 0; a < d; ++a) {
      const auto ra = rk.row(static_cast<int>(a));
      for (std::size_t b = 0; b < d; ++b) emb_grad[k * d + b] += static_cast<double>(ra[b]) * delta[a];
    }
  }
  for (std::size_t k = 0; k < window.size(); ++k) {
    const std::int32_t w = window[k];
    if (w < 0 || w >= emb.rows()) continue;
    const auto u = emb.row(w);
    Matrix<T>& rk = transitions[k];
    for (std::size_t a = 0; a < d; ++a) {
      if (delta[a] == 0.0) continue;
      auto ra = rk.row(static_cast<int>(a));
      T* acc = transition_accum ? (*transition_accum)[k].row(static_cast<int>(a)).data() : nullptr;
      for (std::size_t b = 0; b < d; ++b) {
        ascend(ra[b], delta[a] * static_cast<double>(u[b]), rule, acc ? acc + b : nullptr);
      }
    }
  }
  for (std::size_t k = 0; k < window.size(); ++k) {
    const std::int32_t w = window[k];
    if (w < 0 || w >= emb.rows()) continue;
    auto row = emb.row(w);
    T* acc = emb_accum ? emb_accum->row(w).data() : nullptr;
    for (std::size_t b = 0; b < d; ++b) ascend(row[b], emb_grad[k * d + b], rule, acc ? acc + b : nullptr);
  }
}

}  // namespace mtree

#endif  // MTREE_KERNELS_H_
