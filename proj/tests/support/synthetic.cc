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


#include "support/synthetic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mtree::testing {

namespace {

std::vector<double> zipf_weights(int n, double exponent) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 1.0 / std::pow(i + 1.0, exponent);
  return w;
}

std::string join_stream(const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) {
    text += l;
    text += '\n';
  }
  return text;
}

}  // namespace

std::vector<std::string> clustered_lm_text(const ClusteredLmSpec& gen) {
  std::mt19937_64 rng(gen.seed);
  const int per_cluster = gen.vocab / gen.clusters;
  std::vector<int> perm(gen.vocab);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::discrete_distribution<int>> next_cluster;
  std::uniform_int_distribution<int> pick_cluster(0, gen.clusters - 1);
  for (int c = 0; c < gen.clusters; ++c) {
    std::vector<double> w(gen.clusters, 0.0);
    for (int s = 0; s < gen.successors; ++s) w[pick_cluster(rng)] += 1.0 + s;
    next_cluster.emplace_back(w.begin(), w.end());
  }
  const std::vector<double> within = zipf_weights(per_cluster, 1.0);
  std::discrete_distribution<int> pick_word(within.begin(), within.end());
  std::uniform_int_distribution<int> length(gen.min_length, gen.max_length);

  std::vector<std::string> lines;
  std::size_t produced = 0;
  while (produced < gen.tokens) {
    const int n = std::min<int>(length(rng), static_cast<int>(gen.tokens - produced));
    int cluster = pick_cluster(rng);
    std::string line;
    for (int t = 0; t < n; ++t) {
      const int word = perm[cluster * per_cluster + pick_word(rng)];
      if (t > 0) line += ' ';
      line += "w" + std::to_string(word);
      cluster = next_cluster[cluster](rng);
    }
    produced += n;
    lines.push_back(std::move(line));
  }
  return lines;
}

ClassificationText factored_classification_text(const FactoredClassificationSpec& gen) {
  std::mt19937_64 rng(gen.seed);
  const int labels = gen.topics * gen.styles;
  std::vector<int> rank(labels);
  std::iota(rank.begin(), rank.end(), 0);
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<double> prior(labels);
  const std::vector<double> zipf = zipf_weights(labels, gen.zipf);
  for (int l = 0; l < labels; ++l) prior[l] = zipf[rank[l]];
  std::discrete_distribution<int> pick_label(prior.begin(), prior.end());
  std::uniform_int_distribution<int> pick_topic_word(0, gen.topic_words - 1);
  std::uniform_int_distribution<int> pick_style_word(0, gen.style_words - 1);
  std::uniform_int_distribution<int> pick_noise(0, gen.noise_words - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto make = [&](std::size_t count) {
    std::vector<std::string> lines;
    lines.reserve(count);
    for (std::size_t e = 0; e < count; ++e) {
      const int label = pick_label(rng);
      const int topic = label / gen.styles;
      const int style = label % gen.styles;
      std::ostringstream line;
      line << "__label__t" << topic << "s" << style;
      for (int t = 0; t < gen.length; ++t) {
        const double u = unit(rng);
        if (u < gen.p_topic_word) {
          line << " g" << topic << "_" << pick_topic_word(rng);
        } else if (u < gen.p_topic_word + gen.p_style_word) {
          line << " y" << style << "_" << pick_style_word(rng);
        } else {
          line << " n" << pick_noise(rng);
        }
      }
      lines.push_back(line.str());
    }
    return lines;
  };
  ClassificationText text;
  text.train = make(gen.train);
  text.test = make(gen.test);
  return text;
}

ClassificationCorpus parse_classification(const std::vector<std::string>& lines) {
  std::istringstream in(join_stream(lines));
  return read_classification_corpus(in);
}

ClassificationCorpus parse_classification(const std::vector<std::string>& lines,
                                          const ClassificationCorpus& vocab_from) {
  std::istringstream in(join_stream(lines));
  return read_classification_corpus(in, vocab_from.words, vocab_from.labels);
}

LmCorpus parse_lm(const std::vector<std::string>& lines) {
  std::istringstream in(join_stream(lines));
  return read_lm_corpus(in);
}

LmCorpus parse_lm(const std::vector<std::string>& lines, const Vocabulary& words) {
  std::istringstream in(join_stream(lines));
  return read_lm_corpus(in, words);
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace mtree::testing
