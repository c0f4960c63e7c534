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


#ifndef MTREE_CORPUS_H_
#define MTREE_CORPUS_H_

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtree/tree.h"

namespace mtree {

// String <-> dense id map. Ids are assigned by descending count, ties broken
// lexicographically, after any reserved symbols.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  // Keeps words with count >= min_count.
  static Vocabulary from_counts(const std::unordered_map<std::string, std::int64_t>& counts,
                                std::int64_t min_count,
                                std::span<const std::string> reserved = {});

  // -1 when absent.
  std::int32_t id(const std::string& word) const;
  const std::string& word(std::int32_t id) const { return words_[id]; }
  const std::vector<std::string>& words() const { return words_; }
  std::int32_t size() const { return static_cast<std::int32_t>(words_.size()); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::int32_t> index_;
};

inline constexpr const char* kLabelPrefix = "__label__";
inline constexpr const char* kSentenceStart = "<s>";
inline constexpr const char* kUnknownWord = "<unk>";
// Fixed ids of the reserved language-model symbols.
inline constexpr std::int32_t kSentenceStartId = 0;
inline constexpr std::int32_t kUnknownId = 1;

struct LabeledExample {
  std::vector<std::int32_t> tokens;
  std::vector<Label> labels;
};

struct ClassificationCorpus {
  Vocabulary words;
  Vocabulary labels;
  std::vector<LabeledExample> examples;
  // Lines without any __label__ prefix.
  std::size_t skipped_lines = 0;
};

struct LmCorpus {
  // Starts with <s> and <unk>.
  Vocabulary words;
  std::vector<std::vector<std::int32_t>> sentences;

  std::size_t num_tokens() const;
};

// Splits one line into its __label__ tags and remaining tokens.
void split_labeled_line(const std::string& line, std::vector<std::string>& labels,
                        std::vector<std::string>& tokens);

// Builds vocabularies from the data. Tokens seen fewer than `min_count`
// times are dropped; labels are kept regardless.
ClassificationCorpus read_classification_corpus(std::istream& in, std::int64_t min_count = 1);
ClassificationCorpus load_classification_corpus(const std::string& path, std::int64_t min_count = 1);

// Maps text through existing vocabularies: unknown tokens and labels are
// dropped; lines without labels are skipped.
ClassificationCorpus read_classification_corpus(std::istream& in, const Vocabulary& words,
                                                const Vocabulary& labels);
ClassificationCorpus load_classification_corpus(const std::string& path, const Vocabulary& words,
                                                const Vocabulary& labels);

// One sentence per line, whitespace tokenized; rare words become <unk>.
LmCorpus read_lm_corpus(std::istream& in, std::int64_t min_count = 1);
LmCorpus load_lm_corpus(const std::string& path, std::int64_t min_count = 1);
LmCorpus read_lm_corpus(std::istream& in, const Vocabulary& words);
LmCorpus load_lm_corpus(const std::string& path, const Vocabulary& words);

// The T words preceding position t of a sentence, nearest first, padded with
// <s> before the start.
void context_window(std::span<const std::int32_t> sentence, std::size_t t, int window,
                    std::span<std::int32_t> out);

}  // namespace mtree

#endif  // MTREE_CORPUS_H_
