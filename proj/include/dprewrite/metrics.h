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

#ifndef DPREWRITE_METRICS_H_
#define DPREWRITE_METRICS_H_

// Utility metrics between original and rewritten text.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dprewrite/corpus.h"
#include "dprewrite/lm_provider.h"

namespace dprewrite {

// Sentence BLEU with brevity penalty and add-epsilon smoothing.
//
//   N    = min(max_n, |cand|)
//   p_n  = clipped n-gram matches / candidate n-grams, or 1 / (2 |cand|)
//          when there are no matches
//   BP   = exp(1 - |ref| / |cand|) if |cand| < |ref| else 1
//   BLEU = BP * exp(sum_n ln p_n / N)
//
// An empty candidate scores 0. Capping N at the candidate length makes
// bleu(x, x) == 1 for every nonempty x.
double bleu(std::span<const std::string> candidate,
            std::span<const std::string> reference, int max_n = 4);
double bleu(std::string_view candidate, std::string_view reference,
            int max_n = 4);

// Clipped matches and candidate n-gram totals for n = 1..N.
struct BleuStatistics {
  std::vector<long> matches;
  std::vector<long> totals;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

BleuStatistics bleu_statistics(std::span<const std::string> candidate,
                               std::span<const std::string> reference,
                               int max_n = 4);
// The closed form above, accumulating ln p_n in order n = 1..N.
double bleu_from_statistics(const BleuStatistics& stats);

inline constexpr std::size_t kEmbeddingDim = 512;

// L2-normalized, or all zeros for text with no tokens.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool is_zero() const;
};

// Signed feature hashing of word unigrams and bigrams, weighted by
// (1 + ln tf) * idf and L2-normalized. Unfitted embedders use idf = 1; fit()
// learns smoothed idf = ln((1 + N) / (1 + df)) + 1 per hashed feature.
class HashedTfidfEmbedder {
 public:
  explicit HashedTfidfEmbedder(std::size_t dim = kEmbeddingDim);

  void fit(std::span<const std::string> documents);
  EmbeddingVector embed(std::string_view text) const;
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
  std::vector<double> idf_;  // empty until fit()
};

EmbeddingVector embed(std::string_view text);

// dot(u, v) / (|u| |v|); 0 when either side is the zero vector. Throws
// DomainError on a dimension mismatch.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

// exp(-(1/n) sum ln p(token_i | tokens before i)) over the text's tokens plus
// the closing </s>. Throws DomainError for text with no tokens.
double perplexity(std::string_view text, const LogitsProvider& lm);

struct UtilityRow {
  std::string id;
  double cs = 0.0;
  double bleu = 0.0;
  std::optional<double> ppl;  // absent for an empty rewrite
};

struct UtilityReport {
  std::vector<UtilityRow> rows;
  double mean_cs = 0.0;
  double mean_bleu = 0.0;
  double mean_ppl = 0.0;  // over rows with a perplexity
  int models_averaged = 1;
};

// Per-document CS (embedder fitted on the original texts), BLEU against the
// original and perplexity of the rewrite, with pairwise-summed means.
// Throws AlignmentError unless both corpora list the same ids in order.
UtilityReport utility_report(const Corpus& original, const Corpus& privatized,
                             const LogitsProvider& lm);

// Pairwise (cascade) summation; the result does not depend on how the
// input was produced in parallel.
double pairwise_mean(std::span<const double> values);

}  // namespace dprewrite

#endif  // DPREWRITE_METRICS_H_
