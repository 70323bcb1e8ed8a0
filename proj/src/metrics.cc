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

#include "dprewrite/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "dprewrite/error.h"
#include "dprewrite/random.h"
#include "dprewrite/tokenizer.h"

namespace dprewrite {
namespace {

std::unordered_map<std::string, int> ngram_counts(
    std::span<const std::string> tokens, std::size_t n) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      key += tokens[i + k];
      key.push_back('\x1f');
    }
    ++counts[key];
  }
  return counts;
}

// Hashed word 1- and 2-grams with their term frequencies.
std::map<std::string, int> word_features(std::string_view text) {
  const std::vector<std::string> tokens = tokenize(text);
  std::map<std::string, int> features;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ++features["1\x1f" + tokens[i]];
    if (i + 1 < tokens.size()) {
      ++features["2\x1f" + tokens[i] + "\x1f" + tokens[i + 1]];
    }
  }
  return features;
}

}  // namespace

BleuStatistics bleu_statistics(std::span<const std::string> candidate,
                               std::span<const std::string> reference,
                               int max_n) {
  if (max_n < 1) throw DomainError("max_n must be at least 1");
  BleuStatistics stats;
  stats.candidate_length = candidate.size();
  stats.reference_length = reference.size();
  const std::size_t orders =
      std::min(static_cast<std::size_t>(max_n), candidate.size());
  for (std::size_t n = 1; n <= orders; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    long matches = 0;
    long total = 0;
    for (const auto& [gram, c] : cand) {
      total += c;
      auto it = ref.find(gram);
      if (it != ref.end()) matches += std::min(c, it->second);
    }
    stats.matches.push_back(matches);
    stats.totals.push_back(total);
  }
  return stats;
}

double bleu_from_statistics(const BleuStatistics& stats) {
  if (stats.candidate_length == 0) return 0.0;
  const double cand_len = static_cast<double>(stats.candidate_length);
  double log_sum = 0.0;
  for (std::size_t n = 0; n < stats.matches.size(); ++n) {
    const double p = stats.matches[n] > 0
                         ? static_cast<double>(stats.matches[n]) /
                               static_cast<double>(stats.totals[n])
                         : 1.0 / (2.0 * cand_len);
    log_sum += std::log(p);
  }
  const double ref_len = static_cast<double>(stats.reference_length);
  const double bp = cand_len < ref_len ? std::exp(1.0 - ref_len / cand_len) : 1.0;
  return bp * std::exp(log_sum / static_cast<double>(stats.matches.size()));
}

double bleu(std::span<const std::string> candidate,
            std::span<const std::string> reference, int max_n) {
  return bleu_from_statistics(bleu_statistics(candidate, reference, max_n));
}

double bleu(std::string_view candidate, std::string_view reference,
            int max_n) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return bleu(c, r, max_n);
}

bool EmbeddingVector::is_zero() const {
  for (double x : values) {
    if (x != 0.0) return false;
  }
  return true;
}

HashedTfidfEmbedder::HashedTfidfEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw DomainError("embedding dimension must be positive");
}

void HashedTfidfEmbedder::fit(std::span<const std::string> documents) {
  std::vector<double> df(dim_, 0.0);
  std::vector<char> seen(dim_);
  for (const auto& doc : documents) {
    std::fill(seen.begin(), seen.end(), 0);
    for (const auto& [feature, tf] : word_features(doc)) {
      seen[fnv1a64(feature) % dim_] = 1;
    }
    for (std::size_t i = 0; i < dim_; ++i) df[i] += seen[i];
  }
  const double n = static_cast<double>(documents.size());
  idf_.assign(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    idf_[i] = std::log((1.0 + n) / (1.0 + df[i])) + 1.0;
  }
}

EmbeddingVector HashedTfidfEmbedder::embed(std::string_view text) const {
  EmbeddingVector v{std::vector<double>(dim_, 0.0)};
  for (const auto& [feature, tf] : word_features(text)) {
    const std::uint64_t h = fnv1a64(feature);
    const std::size_t bucket = h % dim_;
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    const double idf = idf_.empty() ? 1.0 : idf_[bucket];
    v.values[bucket] += sign * (1.0 + std::log(static_cast<double>(tf))) * idf;
  }
  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& x : v.values) x /= norm;
  } else {
    std::fill(v.values.begin(), v.values.end(), 0.0);
  }
  return v;
}

EmbeddingVector embed(std::string_view text) {
  static const HashedTfidfEmbedder embedder;
  return embedder.embed(text);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.size() != v.size()) {
    throw DomainError("embedding dimensions differ: " +
                      std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double perplexity(std::string_view text, const LogitsProvider& lm) {
  std::vector<TokenId> ids = lm.vocabulary().encode(text);
  if (ids.empty()) throw DomainError("cannot score text without tokens");
  ids.push_back(Vocabulary::kEos);
  std::vector<TokenId> context;
  context.reserve(ids.size());
  double log_likelihood = 0.0;
  for (TokenId target : ids) {
    log_likelihood += log_softmax(lm.next_logits(context))[target];
    context.push_back(target);
  }
  return std::exp(-log_likelihood / static_cast<double>(ids.size()));
}

double pairwise_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  auto sum = [](auto&& self, std::span<const double> v) -> double {
    if (v.size() <= 8) {
      double s = 0.0;
      for (double x : v) s += x;
      return s;
    }
    const std::size_t half = v.size() / 2;
    return self(self, v.first(half)) + self(self, v.subspan(half));
  };
  return sum(sum, values) / static_cast<double>(values.size());
}

UtilityReport utility_report(const Corpus& original, const Corpus& privatized,
                             const LogitsProvider& lm) {
  if (original.size() != privatized.size()) {
    throw AlignmentError("corpora differ in length: " +
                         std::to_string(original.size()) + " vs " +
                         std::to_string(privatized.size()));
  }
  for (std::size_t i = 0; i < original.size(); ++i) {
    if (original[i].id != privatized[i].id) {
      throw AlignmentError("document " + std::to_string(i) + " has id '" +
                           privatized[i].id + "', expected '" +
                           original[i].id + "'");
    }
  }
  std::vector<std::string> texts;
  texts.reserve(original.size());
  for (const auto& d : original) texts.push_back(d.text);
  HashedTfidfEmbedder embedder;
  embedder.fit(texts);

  UtilityReport report;
  std::vector<double> cs, bl, ppl;
  for (std::size_t i = 0; i < original.size(); ++i) {
    UtilityRow row;
    row.id = original[i].id;
    row.cs = cosine_similarity(embedder.embed(original[i].text),
                               embedder.embed(privatized[i].text));
    row.bleu = bleu(privatized[i].text, original[i].text);
    if (!tokenize(privatized[i].text).empty()) {
      row.ppl = perplexity(privatized[i].text, lm);
      ppl.push_back(*row.ppl);
    }
    cs.push_back(row.cs);
    bl.push_back(row.bleu);
    report.rows.push_back(std::move(row));
  }
  report.mean_cs = pairwise_mean(cs);
  report.mean_bleu = pairwise_mean(bl);
  report.mean_ppl = pairwise_mean(ppl);
  return report;
}

}  // namespace dprewrite
