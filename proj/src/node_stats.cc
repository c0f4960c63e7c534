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


#include "mtree/node_stats.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include "mtree/error.h"

namespace mtree {

void NodeStats::record(NodeId node, Label label, std::span<const double> probs) {
  if (probs.empty()) throw DimensionError("empty probability vector");
  const int m = static_cast<int>(probs.size());
  if (arity_ == 0) arity_ = m;
  if (m != arity_) {
    throw DimensionError("probability vector has " + std::to_string(m) + " entries, stats hold " +
                         std::to_string(arity_));
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw DomainError("probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw DomainError("probability vector sums to " + std::to_string(total));
  }
  Entry& e = entries_[key(node, label)];
  if (e.sum_probas.empty()) e.sum_probas.assign(m, 0.0);
  if (decay_ != 1.0) {
    for (double& s : e.sum_probas) s *= decay_;
    e.count *= decay_;
  }
  for (int j = 0; j < m; ++j) e.sum_probas[j] += probs[j];
  e.count += 1.0;
}

const NodeStats::Entry* NodeStats::find(NodeId node, Label label) const {
  auto it = entries_.find(key(node, label));
  return it == entries_.end() ? nullptr : &it->second;
}

double NodeStats::count(NodeId node, Label label) const {
  const Entry* e = find(node, label);
  return e ? e->count : 0.0;
}

std::vector<double> NodeStats::sum_probas(NodeId node, Label label, int arity) const {
  const Entry* e = find(node, label);
  return e ? e->sum_probas : std::vector<double>(arity, 0.0);
}

std::vector<double> NodeStats::conditional_mean(NodeId node, Label label) const {
  const Entry* e = find(node, label);
  if (!e || e->count <= 0.0) {
    throw NoDataError("no records for node " + std::to_string(node) + ", label " +
                      std::to_string(label));
  }
  std::vector<double> mean(e->sum_probas);
  for (double& v : mean) v /= e->count;
  return mean;
}

std::vector<double> NodeStats::marginal_mean(NodeId node, std::span<const Label> labels) const {
  std::vector<double> total_sum;
  double total = 0.0;
  for (Label label : labels) {
    const Entry* e = find(node, label);
    if (!e || e->count <= 0.0) continue;
    if (total_sum.empty()) total_sum.assign(e->sum_probas.size(), 0.0);
    for (std::size_t j = 0; j < total_sum.size(); ++j) total_sum[j] += e->sum_probas[j];
    total += e->count;
  }
  if (total <= 0.0) throw NoDataError("no records at node " + std::to_string(node));
  for (double& v : total_sum) v /= total;
  return total_sum;
}

void NodeStats::merge_from(const NodeStats& other) {
  if (other.entries_.empty()) return;
  if (arity_ == 0) arity_ = other.arity_;
  if (other.arity_ != arity_) throw DimensionError("cannot merge stats of different arity");
  for (const auto& [k, src] : other.entries_) {
    Entry& dst = entries_[k];
    if (dst.sum_probas.empty()) dst.sum_probas.assign(src.sum_probas.size(), 0.0);
    for (std::size_t j = 0; j < src.sum_probas.size(); ++j) dst.sum_probas[j] += src.sum_probas[j];
    dst.count += src.count;
  }
}

void NodeStats::remap_nodes(std::span<const NodeId> remap) {
  std::unordered_map<std::uint64_t, Entry> moved;
  moved.reserve(entries_.size());
  for (auto& [k, e] : entries_) {
    const auto node = static_cast<NodeId>(k >> 32);
    const auto label = static_cast<Label>(k & 0xffffffffu);
    if (node < 0 || static_cast<std::size_t>(node) >= remap.size() || remap[node] < 0) continue;
    moved.emplace(key(remap[node], label), std::move(e));
  }
  entries_ = std::move(moved);
}

void NodeStats::write(std::ostream& out) const {
  std::vector<std::uint64_t> keys;
  keys.reserve(entries_.size());
  for (const auto& [k, e] : entries_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  out << "nodestats " << arity_ << ' ' << std::hexfloat << decay_ << ' ' << keys.size() << '\n';
  for (std::uint64_t k : keys) {
    const Entry& e = entries_.at(k);
    out << static_cast<NodeId>(k >> 32) << ' ' << static_cast<Label>(k & 0xffffffffu) << ' ' << e.count;
    for (double v : e.sum_probas) out << ' ' << v;
    out << '\n';
  }
  out << std::defaultfloat;
}

NodeStats NodeStats::read(std::istream& in) {
  // operator>> does not parse hexfloat reliably, so go through strtod.
  auto number = [&in]() {
    std::string token;
    if (!(in >> token)) throw FormatError("truncated node statistics");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw FormatError("bad number '" + token + "' in node statistics");
    return v;
  };
  std::string magic;
  in >> magic;
  if (magic != "nodestats") throw FormatError("not a node statistics stream");
  const int arity = static_cast<int>(number());
  NodeStats stats(number());
  stats.arity_ = arity;
  const auto n = static_cast<std::size_t>(number());
  for (std::size_t i = 0; i < n; ++i) {
    const auto node = static_cast<NodeId>(number());
    const auto label = static_cast<Label>(number());
    Entry e;
    e.count = number();
    e.sum_probas.resize(arity);
    for (double& v : e.sum_probas) v = number();
    stats.entries_[key(node, label)] = std::move(e);
  }
  return stats;
}

NodeStats merge(const NodeStats& a, const NodeStats& b) {
  NodeStats out = a;
  out.merge_from(b);
  return out;
}

}  // namespace mtree
