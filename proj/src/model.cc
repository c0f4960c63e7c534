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


#include "mtree/model.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "mtree/error.h"

namespace mtree {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent streams derived from the user seed.
enum class Stream : std::uint64_t { kTree = 1, kInit = 2, kOrder = 3, kLabel = 4 };

std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
}

template <typename T>
std::vector<NodeParams<T>> remap_params(std::vector<NodeParams<T>>& old,
                                        std::span<const NodeId> previous_id, int arity, int dim) {
  std::vector<NodeParams<T>> fresh;
  fresh.reserve(previous_id.size());
  for (NodeId prev : previous_id) {
    if (prev >= 0 && static_cast<std::size_t>(prev) < old.size() && old[prev].arity() == arity) {
      fresh.push_back(std::move(old[prev]));
    } else {
      fresh.emplace_back(arity, dim);
    }
  }
  return fresh;
}

struct AdagradState {
  Matrix<float> embeddings;
  std::vector<Matrix<float>> transitions;
  std::vector<NodeParams<float>> nodes;
};

struct Scratch {
  std::vector<double> r;
  std::vector<double> delta;
  std::vector<double> probs;
  std::vector<std::int32_t> window;
};

class ClassifyTask {
 public:
  explicit ClassifyTask(const ClassificationCorpus& corpus) : corpus_(corpus) {}

  std::size_t size() const { return corpus_.examples.size(); }

  Label label(std::size_t i, std::uint64_t draw) const {
    const auto& labels = corpus_.examples[i].labels;
    if (labels.empty()) return -1;
    return labels[draw % labels.size()];
  }

  void represent(const Model& model, std::size_t i, Scratch& s) const {
    represent_bow<float>(corpus_.examples[i].tokens, model.embeddings, s.r);
  }

  void backward(Model& model, std::size_t i, Scratch& s, const StepRule& rule,
                AdagradState* accum) const {
    bow_backward<float>(corpus_.examples[i].tokens, s.delta, rule, model.embeddings,
                        accum ? &accum->embeddings : nullptr);
  }

 private:
  const ClassificationCorpus& corpus_;
};

class DensityTask {
 public:
  DensityTask(const LmCorpus& corpus, int window) : corpus_(corpus), window_(window) {
    for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
      for (std::size_t t = 0; t < corpus.sentences[s].size(); ++t) {
        positions_.emplace_back(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t));
      }
    }
  }

  std::size_t size() const { return positions_.size(); }

  Label label(std::size_t i, std::uint64_t) const {
    const auto [s, t] = positions_[i];
    return corpus_.sentences[s][t];
  }

  void represent(const Model& model, std::size_t i, Scratch& s) const {
    fill_window(i, s);
    represent_context<float>(s.window, model.embeddings, model.transitions, s.r);
  }

  void backward(Model& model, std::size_t, Scratch& s, const StepRule& rule,
                AdagradState* accum) const {
    // s.window still holds the context filled by represent().
    context_backward<float>(s.window, s.delta, rule, model.embeddings, model.transitions,
                            accum ? &accum->embeddings : nullptr,
                            accum ? &accum->transitions : nullptr);
  }

 private:
  void fill_window(std::size_t i, Scratch& s) const {
    const auto [sent, t] = positions_[i];
    s.window.resize(window_);
    context_window(corpus_.sentences[sent], t, window_, s.window);
  }

  const LmCorpus& corpus_;
  int window_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> positions_;
};

class Trainer {
 public:
  Trainer(Model& model, const TrainConfig& config, std::size_t num_examples)
      : model_(model), config_(config), num_examples_(num_examples) {
    total_steps_ = static_cast<std::int64_t>(num_examples) * config.epochs;
    objective_ = config.node_objective;
    record_stats_ = config.tree == TreeKind::kLearned;
    if (config.adagrad) {
      adagrad_.emplace();
      adagrad_->embeddings = Matrix<float>(model.embeddings.rows(), model.embeddings.cols());
      for (const auto& r : model.transitions) adagrad_->transitions.emplace_back(r.rows(), r.cols());
      adagrad_->nodes.assign(model.nodes.size(), NodeParams<float>(model.arity(), model.dim));
    }
    std::mt19937_64 rng(derive_seed(config.seed, Stream::kOrder));
    orders_.resize(config.epochs);
    for (auto& order : orders_) {
      order.resize(num_examples);
      std::iota(order.begin(), order.end(), 0u);
      std::shuffle(order.begin(), order.end(), rng);
    }
  }

  template <typename Task>
  void run(const Task& task, TrainReport& report, const TrainHooks* hooks) {
    const std::int64_t batch = config_.batch;
    const std::int64_t total_batches = (total_steps_ + batch - 1) / batch;
    std::vector<std::int64_t> points;
    if (config_.tree == TreeKind::kLearned) points = reassignment_batches(total_batches, config_.reassign);
    report.batches = total_batches;

    std::int64_t begin_batch = 0;
    std::size_t next_point = 0;
    while (begin_batch < total_batches || next_point < points.size()) {
      if (next_point < points.size() && points[next_point] == begin_batch) {
        rebuild(report, hooks);
        ++next_point;
        if (begin_batch >= total_batches) break;
      }
      const std::int64_t end_batch =
          next_point < points.size() ? std::min(points[next_point], total_batches) : total_batches;
      const std::int64_t first = begin_batch * batch;
      const std::int64_t last = std::min(end_batch * batch, total_steps_);
      run_segment(task, first, last);
      report.steps += last - first;
      begin_batch = end_batch;
    }
  }

 private:
  template <typename Task>
  void run_segment(const Task& task, std::int64_t first, std::int64_t last) {
    if (first >= last) return;
    const int threads = config_.threads;
    if (threads <= 1) {
      Scratch scratch;
      worker(task, first, last, 1, record_stats_ ? &model_.stats : nullptr, scratch);
      return;
    }
    std::vector<NodeStats> local(threads, NodeStats(config_.stats_decay));
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          Scratch scratch;
          worker(task, first + w, last, threads, record_stats_ ? &local[w] : nullptr, scratch);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    if (record_stats_) {
      for (const auto& s : local) model_.stats.merge_from(s);
    }
  }

  // Processes global steps first, first + stride, ... below last.
  template <typename Task>
  void worker(const Task& task, std::int64_t first, std::int64_t last, int stride, NodeStats* stats,
              Scratch& s) {
    const int d = model_.dim;
    s.r.assign(d, 0.0);
    s.delta.assign(d, 0.0);
    s.probs.assign(model_.arity(), 0.0);
    const std::uint64_t label_seed = derive_seed(config_.seed, Stream::kLabel);
    for (std::int64_t step = first; step < last; step += stride) {
      const std::size_t epoch = static_cast<std::size_t>(step / static_cast<std::int64_t>(num_examples_));
      const std::size_t example = orders_[epoch][step % static_cast<std::int64_t>(num_examples_)];
      const Label label = task.label(example, splitmix64(label_seed ^ static_cast<std::uint64_t>(step)));
      if (label < 0 || !model_.tree.contains(label)) continue;
      StepRule rule;
      rule.lr = learning_rate(config_, static_cast<double>(step) / static_cast<double>(total_steps_));
      rule.adagrad = adagrad_.has_value();

      task.represent(model_, example, s);
      std::fill(s.delta.begin(), s.delta.end(), 0.0);
      for (const PathStep& p : model_.tree.path_of(label)) {
        NodeParams<float>& node = model_.nodes[p.node];
        node_forward<float>(node, s.r, model_.tree.children(p.node), s.probs);
        if (!std::isfinite(s.probs[p.child])) {
          throw Error("training diverged (non-finite node output); lower the learning rate");
        }
        if (stats != nullptr) stats->record(p.node, label, s.probs);
        node_backward<float>(node, s.r, s.probs, p.child, objective_, rule, s.delta,
                             adagrad_ ? &adagrad_->nodes[p.node] : nullptr);
      }
      task.backward(model_, example, s, rule, adagrad_ ? &*adagrad_ : nullptr);
    }
  }

  void rebuild(TrainReport& report, const TrainHooks* hooks) {
    const GradientKind kind = config_.gains.value_or(
        config_.mode == Mode::kClassify ? GradientKind::kProbability : GradientKind::kLogProbability);
    const std::vector<Label> labels = model_.label_set();
    RebuildResult rebuilt = rebuild_tree(model_.stats, labels, config_.arity, config_.depth_cap, kind,
                                         &model_.tree);
    if (adagrad_) {
      adagrad_->nodes = remap_params(adagrad_->nodes, rebuilt.previous_id, config_.arity, model_.dim);
    }
    install_tree(model_, std::move(rebuilt));
    const ValidationReport check = validate(model_.tree);
    report.violations.push_back(check.violations.size());
    ++report.rebuilds;
    if (hooks != nullptr && hooks->on_rebuild) hooks->on_rebuild(model_, check);
  }

  Model& model_;
  const TrainConfig& config_;
  std::size_t num_examples_;
  std::int64_t total_steps_ = 0;
  NodeObjective objective_;
  bool record_stats_ = false;
  std::optional<AdagradState> adagrad_;
  std::vector<std::vector<std::uint32_t>> orders_;
};

template <typename Task>
void run_training(Model& model, const Task& task, const TrainConfig& config, TrainReport* report,
                  const TrainHooks* hooks) {
  const auto start = std::chrono::steady_clock::now();
  TrainReport local;
  if (config.epochs > 0) {
    Trainer trainer(model, config, task.size());
    trainer.run(task, local, hooks);
  }
  local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report != nullptr) *report = std::move(local);
}

}  // namespace

const char* mode_name(Mode mode) { return mode == Mode::kClassify ? "classify" : "lm"; }

const char* tree_kind_name(TreeKind kind) {
  switch (kind) {
    case TreeKind::kLearned: return "learned";
    case TreeKind::kHuffman: return "huffman";
    case TreeKind::kRandom: return "random";
    case TreeKind::kFlat: return "flat";
  }
  return "?";
}

void TrainConfig::check() const {
  if (arity < 2) throw DomainError("arity must be at least 2");
  if (depth_cap && *depth_cap < 1) throw DomainError("depth cap must be at least 1");
  if (dim < 1) throw DomainError("dimension must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw DomainError("learning rate must be finite and >= 0");
  if (epochs < 0) throw DomainError("epochs must be >= 0");
  if (batch < 1) throw DomainError("batch size must be positive");
  if (reassign < 0) throw DomainError("reassign count must be >= 0");
  if (threads < 1) throw DomainError("thread count must be positive");
  if (mode == Mode::kDensity && window < 1) throw DomainError("context window must be at least 1");
  if (!(stats_decay > 0.0 && stats_decay <= 1.0)) throw DomainError("stats decay must be in (0, 1]");
  if (tree == TreeKind::kHuffman && depth_cap) throw DomainError("huffman trees take no depth cap");
}

std::vector<Label> Model::label_set() const {
  std::vector<Label> out;
  if (mode == Mode::kClassify) {
    out.resize(labels.size());
    std::iota(out.begin(), out.end(), 0);
  } else {
    for (std::int32_t w = 0; w < words.size(); ++w) {
      if (w != kSentenceStartId) out.push_back(w);
    }
  }
  return out;
}

std::string Model::label_name(Label label) const {
  const Vocabulary& vocab = mode == Mode::kClassify ? labels : words;
  if (label < 0 || label >= vocab.size()) return "#" + std::to_string(label);
  return vocab.word(label);
}

Label Model::label_id(const std::string& name) const {
  const Label id = mode == Mode::kClassify ? labels.id(name) : words.id(name);
  if (mode == Mode::kDensity && id == kSentenceStartId) return -1;
  return id;
}

Model init_model(Mode mode, Vocabulary words, Vocabulary labels, Tree tree, int dim, int window,
                 std::uint64_t seed) {
  if (dim < 1) throw DomainError("dimension must be positive");
  Model model;
  model.mode = mode;
  model.dim = dim;
  model.window = mode == Mode::kDensity ? window : 0;
  model.words = std::move(words);
  model.labels = mode == Mode::kClassify ? std::move(labels) : Vocabulary();
  model.embeddings = Matrix<float>(model.words.size(), dim);
  std::mt19937_64 rng(derive_seed(seed, Stream::kInit));
  std::uniform_real_distribution<double> uniform(-1.0 / dim, 1.0 / dim);
  for (float& x : model.embeddings.data()) x = static_cast<float>(uniform(rng));
  for (int k = 0; k < model.window; ++k) {
    Matrix<float> r(dim, dim);
    for (int a = 0; a < dim; ++a) r(a, a) = static_cast<float>(1.0 / model.window);
    model.transitions.push_back(std::move(r));
  }
  model.nodes.assign(tree.num_internal(), NodeParams<float>(tree.arity(), dim));
  model.tree = std::move(tree);
  return model;
}

void install_tree(Model& model, RebuildResult rebuilt) {
  const int old_nodes = static_cast<int>(model.nodes.size());
  model.nodes = remap_params(model.nodes, rebuilt.previous_id, rebuilt.tree.arity(), model.dim);
  std::vector<NodeId> remap(old_nodes, -1);
  for (std::size_t n = 0; n < rebuilt.previous_id.size(); ++n) {
    const NodeId prev = rebuilt.previous_id[n];
    if (prev >= 0 && prev < old_nodes) remap[prev] = static_cast<NodeId>(n);
  }
  model.stats.remap_nodes(remap);
  model.tree = std::move(rebuilt.tree);
}

std::vector<std::int64_t> reassignment_batches(std::int64_t total_batches, int reassign) {
  std::vector<std::int64_t> out;
  const std::int64_t half = total_batches / 2;
  for (int k = 1; k <= reassign; ++k) {
    const std::int64_t b = k * half / reassign;
    if (b < 1) continue;
    if (out.empty() || out.back() != b) out.push_back(b);
  }
  return out;
}

double learning_rate(const TrainConfig& config, double progress) {
  progress = std::clamp(progress, 0.0, 1.0);
  if (config.tree == TreeKind::kLearned) {
    return progress < 0.5 ? config.lr : config.lr * 2.0 * (1.0 - progress);
  }
  return config.lr * (1.0 - progress);
}

std::size_t TrainReport::total_violations() const {
  return std::accumulate(violations.begin(), violations.end(), std::size_t{0});
}

Tree initial_tree(std::span<const Label> labels, const FrequencyTable& freqs, const TrainConfig& config) {
  switch (config.tree) {
    case TreeKind::kLearned:
      return build_initial_tree(labels, config.arity, config.depth_cap,
                                derive_seed(config.seed, Stream::kTree));
    case TreeKind::kRandom:
      return random_tree(labels, config.arity, config.depth_cap, derive_seed(config.seed, Stream::kTree));
    case TreeKind::kHuffman:
      return huffman_tree(freqs, config.arity);
    case TreeKind::kFlat:
      return flat_tree(labels);
  }
  throw DomainError("unknown tree kind");
}

namespace {

void check_classification(const ClassificationCorpus& corpus, const TrainConfig& config) {
  config.check();
  if (config.mode != Mode::kClassify) throw DomainError("classification corpus needs classify mode");
  if (corpus.examples.empty() || corpus.labels.size() == 0) {
    throw EmptyInputError("classification corpus has no labeled examples");
  }
}

void check_lm(const LmCorpus& corpus, const TrainConfig& config) {
  config.check();
  if (config.mode != Mode::kDensity) throw DomainError("language-model corpus needs lm mode");
  if (corpus.num_tokens() == 0 || corpus.words.size() < 2) {
    throw EmptyInputError("language-model corpus has no tokens");
  }
}

void check_warm_start(const Model& model, const TrainConfig& config) {
  if (model.mode != config.mode) throw DomainError("model mode differs from the configuration");
  if (model.arity() != config.arity) throw DomainError("model arity differs from the configuration");
  if (model.mode == Mode::kDensity && model.window != config.window) {
    throw DomainError("model context window differs from the configuration");
  }
}

}  // namespace

Model train_from(Model model, const ClassificationCorpus& corpus, const TrainConfig& config,
                 TrainReport* report, const TrainHooks* hooks) {
  check_classification(corpus, config);
  check_warm_start(model, config);
  if (corpus.words.size() != model.words.size() || corpus.labels.size() != model.labels.size()) {
    throw DomainError("corpus vocabularies differ from the model's");
  }
  run_training(model, ClassifyTask(corpus), config, report, hooks);
  return model;
}

Model train_from(Model model, const LmCorpus& corpus, const TrainConfig& config, TrainReport* report,
                 const TrainHooks* hooks) {
  check_lm(corpus, config);
  check_warm_start(model, config);
  if (corpus.words.size() != model.words.size()) throw DomainError("corpus vocabulary differs from the model's");
  run_training(model, DensityTask(corpus, config.window), config, report, hooks);
  return model;
}

Model train(const ClassificationCorpus& corpus, const TrainConfig& config, TrainReport* report,
            const TrainHooks* hooks) {
  check_classification(corpus, config);
  std::vector<double> counts(corpus.labels.size(), 0.0);
  for (const auto& ex : corpus.examples) {
    for (Label l : ex.labels) counts[l] += 1.0;
  }
  FrequencyTable freqs;
  for (Label l = 0; l < corpus.labels.size(); ++l) freqs.emplace_back(l, counts[l]);
  std::vector<Label> labels(corpus.labels.size());
  std::iota(labels.begin(), labels.end(), 0);
  Model model = init_model(Mode::kClassify, corpus.words, corpus.labels,
                           initial_tree(labels, freqs, config), config.dim, 0, config.seed);
  model.stats = NodeStats(config.stats_decay);
  run_training(model, ClassifyTask(corpus), config, report, hooks);
  return model;
}

Model train(const LmCorpus& corpus, const TrainConfig& config, TrainReport* report,
            const TrainHooks* hooks) {
  check_lm(corpus, config);
  std::vector<double> counts(corpus.words.size(), 0.0);
  for (const auto& s : corpus.sentences) {
    for (std::int32_t w : s) counts[w] += 1.0;
  }
  Model probe;
  probe.mode = Mode::kDensity;
  probe.words = corpus.words;
  const std::vector<Label> labels = probe.label_set();
  FrequencyTable freqs;
  for (Label l : labels) freqs.emplace_back(l, counts[l]);
  Model model = init_model(Mode::kDensity, corpus.words, Vocabulary(),
                           initial_tree(labels, freqs, config), config.dim, config.window, config.seed);
  model.stats = NodeStats(config.stats_decay);
  run_training(model, DensityTask(corpus, config.window), config, report, hooks);
  return model;
}

}  // namespace mtree
