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

#include "dprewrite/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "dprewrite/error.h"
#include "dprewrite/random.h"
#include "dprewrite/tokenizer.h"
#include "json.hpp"

namespace dprewrite {
namespace {

using nlohmann::json;

std::string string_or_int(const json& doc, const char* key) {
  if (!doc.contains(key)) throw FormatError(std::string("missing '") + key + "'");
  const json& v = doc[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw FormatError(std::string("'") + key + "' must be a string or integer");
}

std::string required_string(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_string()) {
    throw FormatError(std::string("'") + key + "' must be a string");
  }
  return doc[key].get<std::string>();
}

Corpus keep_if(const Corpus& corpus, const std::set<std::string>& allowed,
               std::string LabeledDocument::*field) {
  Corpus out;
  for (const auto& d : corpus) {
    if (allowed.count(d.*field) != 0) out.push_back(d);
  }
  return out;
}

std::set<std::string> top_values(const Corpus& corpus,
                                 std::string LabeledDocument::*field,
                                 std::size_t k) {
  std::vector<std::string> values;
  values.reserve(corpus.size());
  for (const auto& d : corpus) values.push_back(d.*field);
  const auto top = most_frequent(values, k);
  return {top.begin(), top.end()};
}

// Pronounceable pseudo-word for index i: base-75 digits of i + 75, one
// consonant-vowel syllable per digit. Distinct indices give distinct words.
std::string pseudo_word(std::size_t i) {
  static constexpr std::string_view kConsonants = "bdfghklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  constexpr std::size_t kBase = kConsonants.size() * kVowels.size();
  std::string word;
  for (std::size_t x = i + kBase; x > 0; x /= kBase) {
    const std::size_t digit = x % kBase;
    word.insert(word.begin(), kVowels[digit % kVowels.size()]);
    word.insert(word.begin(), kConsonants[digit / kVowels.size()]);
  }
  return word;
}

std::vector<double> zipf_cdf(std::size_t n) {
  std::vector<double> cdf(n);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    total += 1.0 / static_cast<double>(r + 1);
    cdf[r] = total;
  }
  for (double& c : cdf) c /= total;
  return cdf;
}

std::size_t draw(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                               cdf.size() - 1);
}

}  // namespace

LabeledDocument parse_document(std::string_view line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("record is not a JSON object");
  LabeledDocument d;
  d.id = string_or_int(doc, "id");
  d.text = required_string(doc, "text");
  d.author = string_or_int(doc, "author");
  d.gender = required_string(doc, "gender");
  d.topic = required_string(doc, "topic");
  if (!doc.contains("age") || !doc["age"].is_number()) {
    throw FormatError("'age' must be a number");
  }
  const double age = doc["age"].get<double>();
  if (age != std::floor(age)) throw FormatError("'age' must be an integer");
  d.age = static_cast<int>(age);
  if (d.text.empty()) throw FormatError("empty text");
  if (d.age < 13 || d.age > 48) {
    throw FormatError("age " + std::to_string(d.age) + " outside [13, 48]");
  }
  return d;
}

std::string serialize_document(const LabeledDocument& d) {
  nlohmann::ordered_json doc;
  doc["id"] = d.id;
  doc["text"] = d.text;
  doc["author"] = d.author;
  doc["gender"] = d.gender;
  doc["age"] = d.age;
  doc["topic"] = d.topic;
  return doc.dump();
}

LoadResult load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read corpus " + path.string());
  LoadResult result;
  std::string line;
  std::size_t line_no = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++records;
    try {
      result.corpus.push_back(parse_document(line));
    } catch (const FormatError& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  if (records > 0 && result.errors.size() * 100 > records) {
    throw FormatError(path.string() + ": " +
                      std::to_string(result.errors.size()) + " of " +
                      std::to_string(records) +
                      " records malformed (limit 1%); first at line " +
                      std::to_string(result.errors.front().line) + ": " +
                      result.errors.front().message);
  }
  return result;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write corpus " + path.string());
  for (const auto& d : corpus) out << serialize_document(d) << '\n';
}

std::vector<std::string> most_frequent(const std::vector<std::string>& values,
                                       std::size_t k) {
  std::map<std::string, std::size_t> counts;
  for (const auto& v : values) ++counts[v];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    out.push_back(ranked[i].first);
  }
  return out;
}

Corpus filter_pipeline(const Corpus& corpus, FilterSummary* summary) {
  Corpus known;
  for (const auto& d : corpus) {
    if (d.topic != "indUnk" && d.topic != "Student") known.push_back(d);
  }
  Corpus top = keep_if(known, top_values(known, &LabeledDocument::topic, 15),
                       &LabeledDocument::topic);
  Corpus out;
  for (const auto& d : top) {
    if (tokenize(d.text).size() <= kMaxDocumentTokens) out.push_back(d);
  }
  if (summary != nullptr) {
    summary->input = corpus.size();
    summary->after_topic_drop = known.size();
    summary->after_top_topics = top.size();
    summary->after_length = out.size();
  }
  return out;
}

Corpus select_author10(const Corpus& corpus) {
  return keep_if(corpus, top_values(corpus, &LabeledDocument::author, 10),
                 &LabeledDocument::author);
}

Corpus select_topic10(const Corpus& corpus, double sample_rate,
                      std::uint64_t seed) {
  if (!(sample_rate >= 0.0 && sample_rate <= 1.0)) {
    throw DomainError("sample rate must lie in [0, 1]");
  }
  const Corpus top = keep_if(
      corpus, top_values(corpus, &LabeledDocument::topic, 10),
      &LabeledDocument::topic);
  Corpus out;
  for (const auto& d : top) {
    const std::uint64_t h = splitmix64(fnv1a64(d.id) ^ splitmix64(seed));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    if (u < sample_rate) out.push_back(d);
  }
  return out;
}

const AgeBin& bin_age(int age) {
  for (const auto& bin : kAgeBins) {
    if (age > bin.lo && age <= bin.hi) return bin;
  }
  throw DomainError("age " + std::to_string(age) + " outside (13, 48]");
}

SplitIndices split_indices(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw DomainError("split ratio must lie in [0, 1]");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(n) + 1e-9));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  out.val.assign(order.begin() + static_cast<long>(n_train), order.end());
  return out;
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, double ratio,
                                std::uint64_t seed) {
  const SplitIndices idx = split_indices(corpus.size(), ratio, seed);
  std::pair<Corpus, Corpus> out;
  for (std::size_t i : idx.train) out.first.push_back(corpus[i]);
  for (std::size_t i : idx.val) out.second.push_back(corpus[i]);
  return out;
}

Corpus generate_synthetic(const SyntheticOptions& o) {
  if (o.n_authors == 0) throw DomainError("need at least one author");
  if (o.vocab_size == 0) throw DomainError("shared vocabulary is empty");
  if (!(o.signal_strength >= 0.0 && o.signal_strength <= 1.0)) {
    throw DomainError("signal strength must lie in [0, 1]");
  }
  if (o.min_tokens == 0 || o.min_tokens > o.max_tokens) {
    throw DomainError("invalid document length range");
  }
  static constexpr std::array<std::string_view, 10> kTopics{
      "Technology", "Arts",        "Education", "Communications-Media",
      "Internet",   "Non-Profit",  "Engineering", "Law",
      "Science",    "Government"};
  static constexpr std::array<int, 5> kAges{18, 24, 25, 30, 40};

  const std::size_t private_size = std::max<std::size_t>(8, o.vocab_size / o.n_authors);
  const std::vector<double> shared_cdf = zipf_cdf(o.vocab_size);
  const std::vector<double> private_cdf = zipf_cdf(private_size);

  Rng rng(o.seed);
  Corpus corpus;
  corpus.reserve(o.n_docs);
  for (std::size_t i = 0; i < o.n_docs; ++i) {
    const std::size_t a = uniform_index(rng, o.n_authors);
    const std::size_t length =
        o.min_tokens + uniform_index(rng, o.max_tokens - o.min_tokens + 1);
    std::string text;
    for (std::size_t t = 0; t < length; ++t) {
      std::size_t word;
      if (uniform01(rng) < o.signal_strength) {
        word = o.vocab_size + a * private_size + draw(private_cdf, rng);
      } else {
        word = draw(shared_cdf, rng);
      }
      if (!text.empty()) text.push_back(' ');
      text += pseudo_word(word);
    }
    text += " .";

    char id[32];
    std::snprintf(id, sizeof(id), "syn-%06zu", i);
    char author[32];
    std::snprintf(author, sizeof(author), "author%02zu", a);
    corpus.push_back(LabeledDocument{
        id, std::move(text), author, a % 2 == 0 ? "male" : "female",
        kAges[a % kAges.size()], std::string(kTopics[a % kTopics.size()])});
  }
  return corpus;
}

}  // namespace dprewrite
