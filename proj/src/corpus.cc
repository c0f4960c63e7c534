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


#include "mtree/corpus.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mtree/error.h"

namespace mtree {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

bool starts_with_label(const std::string& token) {
  return token.rfind(kLabelPrefix, 0) == 0;
}

// Reads a labeled line; throws FormatError on an empty tag.
void parse_line(const std::string& line, std::size_t line_no, std::vector<std::string>& labels,
                std::vector<std::string>& tokens) {
  split_labeled_line(line, labels, tokens);
  for (const std::string& tag : labels) {
    if (tag.empty()) {
      throw FormatError("line " + std::to_string(line_no) + ": empty " + kLabelPrefix + " tag");
    }
  }
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<std::int32_t>(i)).second) {
      throw FormatError("duplicate vocabulary entry '" + words_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::from_counts(const std::unordered_map<std::string, std::int64_t>& counts,
                                   std::int64_t min_count, std::span<const std::string> reserved) {
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [word, count] : counts) {
    if (count < min_count) continue;
    if (std::find(reserved.begin(), reserved.end(), word) != reserved.end()) continue;
    kept.emplace_back(word, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words(reserved.begin(), reserved.end());
  for (auto& entry : kept) words.push_back(std::move(entry.first));
  return Vocabulary(std::move(words));
}

std::int32_t Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? -1 : it->second;
}

std::size_t LmCorpus::num_tokens() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

void split_labeled_line(const std::string& line, std::vector<std::string>& labels,
                        std::vector<std::string>& tokens) {
  labels.clear();
  tokens.clear();
  std::istringstream words(line);
  std::string token;
  while (words >> token) {
    if (starts_with_label(token)) {
      labels.push_back(token.substr(std::string(kLabelPrefix).size()));
    } else {
      tokens.push_back(std::move(token));
    }
  }
}

ClassificationCorpus read_classification_corpus(std::istream& in, std::int64_t min_count) {
  std::vector<std::vector<std::string>> raw_labels;
  std::vector<std::vector<std::string>> raw_tokens;
  std::unordered_map<std::string, std::int64_t> word_counts;
  std::unordered_map<std::string, std::int64_t> label_counts;
  ClassificationCorpus corpus;
  std::string line;
  std::vector<std::string> labels, tokens;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    parse_line(line, line_no, labels, tokens);
    if (labels.empty()) {
      if (!tokens.empty()) ++corpus.skipped_lines;
      continue;
    }
    for (const auto& t : tokens) ++word_counts[t];
    for (const auto& l : labels) ++label_counts[l];
    raw_labels.push_back(labels);
    raw_tokens.push_back(tokens);
  }
  corpus.words = Vocabulary::from_counts(word_counts, min_count);
  corpus.labels = Vocabulary::from_counts(label_counts, 1);
  corpus.examples.reserve(raw_labels.size());
  for (std::size_t e = 0; e < raw_labels.size(); ++e) {
    LabeledExample ex;
    for (const auto& t : raw_tokens[e]) {
      const std::int32_t id = corpus.words.id(t);
      if (id >= 0) ex.tokens.push_back(id);
    }
    for (const auto& l : raw_labels[e]) {
      const Label id = corpus.labels.id(l);
      if (std::find(ex.labels.begin(), ex.labels.end(), id) == ex.labels.end()) ex.labels.push_back(id);
    }
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

ClassificationCorpus load_classification_corpus(const std::string& path, std::int64_t min_count) {
  auto in = open_input(path);
  return read_classification_corpus(in, min_count);
}

ClassificationCorpus read_classification_corpus(std::istream& in, const Vocabulary& words,
                                                const Vocabulary& labels) {
  ClassificationCorpus corpus;
  corpus.words = words;
  corpus.labels = labels;
  std::string line;
  std::vector<std::string> tags, tokens;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    parse_line(line, line_no, tags, tokens);
    if (tags.empty()) {
      if (!tokens.empty()) ++corpus.skipped_lines;
      continue;
    }
    LabeledExample ex;
    for (const auto& t : tokens) {
      const std::int32_t id = words.id(t);
      if (id >= 0) ex.tokens.push_back(id);
    }
    for (const auto& tag : tags) {
      const Label id = labels.id(tag);
      if (id >= 0 && std::find(ex.labels.begin(), ex.labels.end(), id) == ex.labels.end()) {
        ex.labels.push_back(id);
      }
    }
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

ClassificationCorpus load_classification_corpus(const std::string& path, const Vocabulary& words,
                                                const Vocabulary& labels) {
  auto in = open_input(path);
  return read_classification_corpus(in, words, labels);
}

LmCorpus read_lm_corpus(std::istream& in, std::int64_t min_count) {
  std::vector<std::vector<std::string>> raw;
  std::unordered_map<std::string, std::int64_t> counts;
  std::string line, token;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<std::string> sentence;
    while (words >> token) {
      ++counts[token];
      sentence.push_back(token);
    }
    if (!sentence.empty()) raw.push_back(std::move(sentence));
  }
  const std::string reserved[] = {kSentenceStart, kUnknownWord};
  LmCorpus corpus;
  corpus.words = Vocabulary::from_counts(counts, min_count, reserved);
  corpus.sentences.reserve(raw.size());
  for (const auto& sentence : raw) {
    std::vector<std::int32_t> ids;
    ids.reserve(sentence.size());
    for (const auto& w : sentence) {
      const std::int32_t id = corpus.words.id(w);
      ids.push_back(id > kSentenceStartId ? id : kUnknownId);
    }
    corpus.sentences.push_back(std::move(ids));
  }
  return corpus;
}

LmCorpus load_lm_corpus(const std::string& path, std::int64_t min_count) {
  auto in = open_input(path);
  return read_lm_corpus(in, min_count);
}

LmCorpus read_lm_corpus(std::istream& in, const Vocabulary& words) {
  LmCorpus corpus;
  corpus.words = words;
  std::string line, token;
  while (std::getline(in, line)) {
    std::istringstream stream(line);
    std::vector<std::int32_t> ids;
    while (stream >> token) {
      const std::int32_t id = words.id(token);
      ids.push_back(id > kSentenceStartId ? id : kUnknownId);
    }
    if (!ids.empty()) corpus.sentences.push_back(std::move(ids));
  }
  return corpus;
}

LmCorpus load_lm_corpus(const std::string& path, const Vocabulary& words) {
  auto in = open_input(path);
  return read_lm_corpus(in, words);
}

void context_window(std::span<const std::int32_t> sentence, std::size_t t, int window,
                    std::span<std::int32_t> out) {
  for (int k = 0; k < window; ++k) {
    const std::size_t back = static_cast<std::size_t>(k) + 1;
    out[k] = t >= back ? sentence[t - back] : kSentenceStartId;
  }
}

}  // namespace mtree
