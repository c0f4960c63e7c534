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


// mtree: train, apply and inspect learned label-tree models.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mtree/corpus.h"
#include "mtree/error.h"
#include "mtree/inference.h"
#include "mtree/model.h"
#include "mtree/model_io.h"
#include "mtree/objective.h"

namespace {

using namespace mtree;

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

struct TrainArgs {
  std::string mode = "classify";
  std::string tree = "learned";
  int depth = 0;
  std::string objective = "logp";
  std::string gains;
  std::string input;
  std::string output;
  std::int64_t min_count = 1;
  bool quiet = false;
  TrainConfig config;
};

struct ModelArgs {
  std::string model;
  std::string input;
  std::string output;
  int threads = 1;
  bool json = false;
  int topk = 4;
};

struct BoundArgs {
  double kappa = 0.5;
  double gamma = 0.5;
  int arity = 2;
  long long labels = 2;
  bool balanced = false;
  bool verbose = false;
};

std::ostream* open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return &std::cout;
  file.open(path);
  if (!file) throw IoError("cannot open " + path + " for writing");
  return &file;
}

int run_train(TrainArgs& args) {
  TrainConfig& config = args.config;
  static const std::map<std::string, Mode> modes = {{"classify", Mode::kClassify}, {"lm", Mode::kDensity}};
  static const std::map<std::string, TreeKind> kinds = {{"learned", TreeKind::kLearned},
                                                        {"huffman", TreeKind::kHuffman},
                                                        {"random", TreeKind::kRandom},
                                                        {"flat", TreeKind::kFlat}};
  config.mode = modes.at(args.mode);
  config.tree = kinds.at(args.tree);
  if (args.depth > 0) config.depth_cap = args.depth;
  config.node_objective = args.objective == "p" ? NodeObjective::kProbability : NodeObjective::kLogProbability;
  if (!args.gains.empty()) {
    config.gains = args.gains == "p" ? GradientKind::kProbability : GradientKind::kLogProbability;
  }
  config.check();

  TrainReport report;
  Model model;
  if (config.mode == Mode::kClassify) {
    const ClassificationCorpus corpus = load_classification_corpus(args.input, args.min_count);
    if (corpus.skipped_lines > 0) {
      std::cerr << "warning: skipped " << corpus.skipped_lines << " lines without labels\n";
    }
    model = train(corpus, config, &report);
  } else {
    const LmCorpus corpus = load_lm_corpus(args.input, args.min_count);
    model = train(corpus, config, &report);
  }
  save_model(model, args.output);
  if (!args.quiet) {
    std::cerr << "trained " << mode_name(config.mode) << " model: labels=" << model.tree.num_labels()
              << " nodes=" << model.tree.num_internal() << " steps=" << report.steps
              << " rebuilds=" << report.rebuilds << " violations=" << report.total_violations()
              << " seconds=" << std::fixed << std::setprecision(2) << report.seconds << "\n";
  }
  return report.total_violations() == 0 ? 0 : kExitFailure;
}

int run_predict(const ModelArgs& args) {
  const Model model = load_model(args.model);
  std::ifstream in(args.input);
  if (!in) throw IoError("cannot open " + args.input);
  std::ofstream file;
  std::ostream& out = *open_output(args.output, file);
  std::string line;
  std::vector<std::string> tags, tokens;
  std::vector<std::int32_t> ids;
  while (std::getline(in, line)) {
    split_labeled_line(line, tags, tokens);
    ids.clear();
    if (model.mode == Mode::kClassify) {
      for (const auto& t : tokens) {
        const std::int32_t id = model.words.id(t);
        if (id >= 0) ids.push_back(id);
      }
    } else {
      // The line is the history; predict the word that follows it.
      std::vector<std::int32_t> history;
      for (const auto& t : tokens) {
        const std::int32_t id = model.words.id(t);
        history.push_back(id > kSentenceStartId ? id : kUnknownId);
      }
      ids.resize(model.window);
      context_window(history, history.size(), model.window, ids);
    }
    out << model.label_name(predict_top1(model, ids)) << "\n";
  }
  if (!out) throw IoError("failed writing predictions");
  return 0;
}

int run_eval(const ModelArgs& args) {
  const Model model = load_model(args.model);
  EvalReport report;
  if (model.mode == Mode::kClassify) {
    const ClassificationCorpus corpus = load_classification_corpus(args.input, model.words, model.labels);
    report = precision_at_1(model, corpus.examples, args.threads);
  } else {
    const LmCorpus corpus = load_lm_corpus(args.input, model.words);
    report = perplexity(model, corpus.sentences, args.threads);
  }
  std::cout << (args.json ? report.to_json() : report.to_line()) << "\n";
  return 0;
}

int run_dump(const ModelArgs& args) {
  const Model model = load_model(args.model);
  std::ofstream file;
  std::ostream& out = *open_output(args.output, file);
  dump_tree(model.tree, args.topk, [&](Label l) { return model.label_name(l); }, out);
  return 0;
}

int run_bound(const BoundArgs& args) {
  const NodeBound b = boosting_node_bound(args.kappa, args.gamma, args.arity, args.labels, args.balanced);
  std::cout << std::setprecision(10);
  if (std::isfinite(b.bound)) {
    std::cout << b.bound << "\n";
  } else {
    std::cout << "inf ln=" << b.log_bound << "\n";
  }
  if (args.verbose) std::cerr << "exponent=" << b.exponent << " ln_bound=" << b.log_bound << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned M-ary label trees for extreme classification and language modeling", "mtree"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write it to --output");
  train_cmd->add_option("--mode", train_args.mode, "classify or lm")
      ->check(CLI::IsMember({"classify", "lm"}))->capture_default_str();
  train_cmd->add_option("--tree", train_args.tree, "learned, huffman, random or flat")
      ->check(CLI::IsMember({"learned", "huffman", "random", "flat"}))->capture_default_str();
  train_cmd->add_option("--arity", train_args.config.arity, "Children per node (M)")->capture_default_str();
  train_cmd->add_option("--depth", train_args.depth, "Depth cap D (0 = none)")->capture_default_str();
  train_cmd->add_option("--dim", train_args.config.dim, "Representation dimension")->capture_default_str();
  train_cmd->add_option("--lr", train_args.config.lr, "Base learning rate")->capture_default_str();
  train_cmd->add_option("--epochs", train_args.config.epochs)->capture_default_str();
  train_cmd->add_option("--batch", train_args.config.batch, "Examples per batch")->capture_default_str();
  train_cmd->add_option("--reassign", train_args.config.reassign, "Tree rebuilds over the first half")
      ->capture_default_str();
  train_cmd->add_option("--threads", train_args.config.threads)->capture_default_str();
  train_cmd->add_option("--seed", train_args.config.seed)->capture_default_str();
  train_cmd->add_option("--window", train_args.config.window, "Context length T (lm)")->capture_default_str();
  train_cmd->add_option("--min-count", train_args.min_count, "Drop rarer tokens")->capture_default_str();
  train_cmd->add_option("--stats-decay", train_args.config.stats_decay)->capture_default_str();
  train_cmd->add_option("--objective", train_args.objective, "Node update ascends p or log p of the target child")
      ->check(CLI::IsMember({"p", "logp"}))->capture_default_str();
  train_cmd->add_option("--gains", train_args.gains,
                        "Reassignment gains, dJ/dp or dJ/dlog p (default p for classify, logp for lm)")
      ->check(CLI::IsMember({"p", "logp"}));
  train_cmd->add_flag("--adagrad", train_args.config.adagrad, "Adagrad step scaling");
  train_cmd->add_flag("--quiet", train_args.quiet);
  train_cmd->add_option("--input", train_args.input)->required();
  train_cmd->add_option("--output", train_args.output)->required();

  ModelArgs model_args;
  auto* predict_cmd = app.add_subcommand("predict", "Write the top label for each input line");
  predict_cmd->add_option("--model", model_args.model)->required();
  predict_cmd->add_option("--input", model_args.input)->required();
  predict_cmd->add_option("--output", model_args.output, "Defaults to stdout");

  auto* eval_cmd = app.add_subcommand("eval", "P@1 (classify) or perplexity (lm)");
  eval_cmd->add_option("--model", model_args.model)->required();
  eval_cmd->add_option("--input", model_args.input)->required();
  eval_cmd->add_option("--threads", model_args.threads)->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--json", model_args.json, "Emit a JSON record");

  auto* dump_cmd = app.add_subcommand("dump-tree", "Print one line per internal node");
  dump_cmd->add_option("--model", model_args.model)->required();
  dump_cmd->add_option("--topk", model_args.topk)->check(CLI::NonNegativeNumber)->capture_default_str();
  dump_cmd->add_option("--output", model_args.output, "Defaults to stdout");

  BoundArgs bound_args;
  auto* bound_cmd = app.add_subcommand("bound", "Internal nodes sufficient for error kappa");
  bound_cmd->add_option("--kappa", bound_args.kappa)->required();
  bound_cmd->add_option("--gamma", bound_args.gamma)->required();
  bound_cmd->add_option("--arity", bound_args.arity)->required();
  bound_cmd->add_option("--labels", bound_args.labels)->required();
  bound_cmd->add_flag("--balanced", bound_args.balanced, "Perfectly balanced splits");
  bound_cmd->add_flag("--verbose", bound_args.verbose);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) return run_train(train_args);
    if (*predict_cmd) return run_predict(model_args);
    if (*eval_cmd) return run_eval(model_args);
    if (*dump_cmd) return run_dump(model_args);
    if (*bound_cmd) return run_bound(bound_args);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
