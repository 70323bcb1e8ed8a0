// Copyright 2026 The dprewrite Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPREWRITE_CORPUS_H_
#define DPREWRITE_CORPUS_H_

// Labeled documents, the blog-corpus preparation pipeline, splits and a
// synthetic corpus generator.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dprewrite {

struct LabeledDocument {
  std::string id;
  std::string text;
  std::string author;
  std::string gender;
  int age = 0;
  std::string topic;

  friend bool operator==(const LabeledDocument&,
                         const LabeledDocument&) = default;
};

using Corpus = std::vector<LabeledDocument>;

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LoadResult {
  Corpus corpus;
  std::vector<LineError> errors;
};

// Reads one JSON object per line with fields id, text, author, gender, age,
// topic. id and author may be strings or integers. Blank lines are skipped.
// A record is malformed if a field is missing or mistyped, the text is empty,
// or age lies outside [13, 48]. Throws FormatError if the file cannot be read
// or more than 1% of records are malformed.
LoadResult load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Parses one record; throws FormatError.
LabeledDocument parse_document(std::string_view line);
std::string serialize_document(const LabeledDocument& doc);

inline constexpr std::size_t kMaxDocumentTokens = 256;

struct FilterSummary {
  std::size_t input = 0;
  std::size_t after_topic_drop = 0;   // indUnk and Student removed
  std::size_t after_top_topics = 0;   // 15 most frequent topics kept
  std::size_t after_length = 0;       // <= 256 tokens
};

// Drops topics indUnk and Student, keeps the 15 most frequent remaining
// topics, then drops documents longer than 256 tokens (toy tokenizer).
// Frequency ties between topics go to the lexicographically smaller name.
Corpus filter_pipeline(const Corpus& corpus, FilterSummary* summary = nullptr);

// Documents of the 10 most frequent authors; ties go to the smaller id.
Corpus select_author10(const Corpus& corpus);

// Documents of the 10 most frequent topics, thinned to `sample_rate`. A
// document is kept iff a hash of (seed, id) falls below the rate, so the
// sample is reproducible and applying it twice changes nothing.
Corpus select_topic10(const Corpus& corpus, double sample_rate = 0.10,
                      std::uint64_t seed = 42);

// Most frequent values, ties broken lexicographically.
std::vector<std::string> most_frequent(const std::vector<std::string>& values,
                                       std::size_t k);

struct AgeBin {
  std::string_view label;
  int lo;  // exclusive
  int hi;  // inclusive
};

inline constexpr std::array<AgeBin, 5> kAgeBins{{
    {"(13,23]", 13, 23},
    {"(23,24]", 23, 24},
    {"(24,26]", 24, 26},
    {"(26,33]", 26, 33},
    {"(33,48]", 33, 48},
}};

// Throws DomainError unless 13 < age <= 48.
const AgeBin& bin_age(int age);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Fisher-Yates shuffle of 0..n-1 driven by mt19937_64(seed), drawing
// j = uniform_index(rng, i + 1) for i = n-1 down to 1; the first
// floor(ratio * n) shuffled indices form the training part.
SplitIndices split_indices(std::size_t n, double ratio = 0.9,
                           std::uint64_t seed = 42);
std::pair<Corpus, Corpus> split(const Corpus& corpus, double ratio = 0.9,
                                std::uint64_t seed = 42);

struct SyntheticOptions {
  std::size_t n_docs = 500;
  std::size_t n_authors = 4;
  std::size_t vocab_size = 400;   // shared words
  double signal_strength = 0.8;   // probability a token is author-specific
  std::uint64_t seed = 42;
  std::size_t min_tokens = 16;
  std::size_t max_tokens = 48;
};

// Each author owns vocab_size / n_authors private words (at least 8). A token
// is drawn from the author's words with probability signal_strength and from
// the shared words otherwise, Zipf-weighted in both cases. Gender, age and
// topic are fixed per author.
Corpus generate_synthetic(const SyntheticOptions& options);

}  // namespace dprewrite

#endif  // DPREWRITE_CORPUS_H_
