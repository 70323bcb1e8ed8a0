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

#include <gtest/gtest.h>

#include <cmath>

#include "dprewrite/error.h"
#include "dprewrite/random.h"
#include "dprewrite/tokenizer.h"

namespace dprewrite {
namespace {

std::vector<std::string> words(std::string_view s) { return tokenize(s); }

TEST(Bleu, IdentityIsOne) {
  for (const char* s : {"the cat sat on the mat", "a b c d", "x", "x y"}) {
    EXPECT_DOUBLE_EQ(bleu(s, s), 1.0) << s;
  }
}

TEST(Bleu, EmptyCandidateIsZero) {
  EXPECT_EQ(bleu("", "the cat"), 0.0);
  EXPECT_EQ(bleu("", ""), 0.0);
}

TEST(Bleu, HandCountedRepeatedWord) {
  // Unigrams: "the" x3 against one reference "the" -> 1/3. Bigrams and the
  // trigram never match -> 1/(2*3) each. |cand| = 3 >= |ref| = 2, so BP = 1.
  const double want = std::cbrt((1.0 / 3) * (1.0 / 6) * (1.0 / 6));
  EXPECT_NEAR(bleu("the the the", "the cat"), want, 1e-15);
  EXPECT_NEAR(want, std::cbrt(1.0 / 108), 1e-15);
}

TEST(Bleu, BrevityPenalty) {
  // Four matching orders, candidate 4 of reference 8: BP = exp(1 - 2).
  EXPECT_NEAR(bleu("a b c d", "a b c d e f g h"), std::exp(-1.0), 1e-15);
}

TEST(Bleu, StatisticsAreClipped) {
  const auto st = bleu_statistics(words("a a a b"), words("a b b"), 4);
  EXPECT_EQ(st.matches, (std::vector<long>{2, 1, 0, 0}));
  EXPECT_EQ(st.totals, (std::vector<long>{4, 3, 2, 1}));
}

TEST(Bleu, RangeProperty) {
  Rng rng(1);
  const char* alphabet[] = {"a", "b", "c", "d"};
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::string> c, r;
    for (std::size_t k = uniform_index(rng, 9); k > 0; --k) c.push_back(alphabet[uniform_index(rng, 4)]);
    for (std::size_t k = uniform_index(rng, 9); k > 0; --k) r.push_back(alphabet[uniform_index(rng, 4)]);
    const double b = bleu(c, r);
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 1.0);
  }
}

TEST(Bleu, RejectsBadOrder) {
  EXPECT_THROW(bleu("a", "a", 0), DomainError);
}

TEST(Embedding, DeterministicAndNormalized) {
  const EmbeddingVector a = embed("the quick brown fox");
  const EmbeddingVector b = embed("the quick brown fox");
  EXPECT_EQ(a.values, b.values);
  ASSERT_EQ(a.size(), kEmbeddingDim);
  double n = 0.0;
  for (double x : a.values) n += x * x;
  EXPECT_NEAR(n, 1.0, 1e-9);
}

TEST(Embedding, EmptyTextIsZeroSentinel) {
  EXPECT_TRUE(embed("").is_zero());
  EXPECT_TRUE(embed(" ").is_zero());
  EXPECT_EQ(cosine_similarity(embed(""), embed("x")), 0.0);
}

TEST(Embedding, DisjointVocabulariesNearlyOrthogonal) {
  // Fixture pairs sharing no words; the residual cosine comes from hash
  // collisions only.
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    std::string a, b;
    for (int k = 0; k < 12; ++k) {
      a += "a" + std::to_string(uniform_index(rng, 1000)) + " ";
      b += "b" + std::to_string(uniform_index(rng, 1000)) + " ";
    }
    worst = std::max(worst, std::fabs(cosine_similarity(embed(a), embed(b))));
  }
  EXPECT_LT(worst, 0.25);
}

TEST(Embedding, MeanCollisionCosineIsSmall) {
  Rng rng(6);
  double total = 0.0;
  constexpr int kPairs = 500;
  for (int i = 0; i < kPairs; ++i) {
    std::string a, b;
    for (int k = 0; k < 12; ++k) {
      a += "a" + std::to_string(uniform_index(rng, 1000)) + " ";
      b += "b" + std::to_string(uniform_index(rng, 1000)) + " ";
    }
    total += std::fabs(cosine_similarity(embed(a), embed(b)));
  }
  EXPECT_LT(total / kPairs, 0.05);
}

TEST(Cosine, Examples) {
  const EmbeddingVector v = embed("some words here");
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-12);
  EmbeddingVector neg = v;
  for (double& x : neg.values) x = -x;
  EXPECT_NEAR(cosine_similarity(v, neg), -1.0, 1e-12);
  EmbeddingVector e0{std::vector<double>(4, 0.0)}, e1 = e0;
  e0.values[0] = 1;
  e1.values[1] = 1;
  EXPECT_EQ(cosine_similarity(e0, e1), 0.0);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    EmbeddingVector u{std::vector<double>(8)}, v{std::vector<double>(8)};
    for (int k = 0; k < 8; ++k) {
      u.values[k] = uniform01(rng) - 0.5;
      v.values[k] = uniform01(rng) - 0.5;
    }
    const double c = cosine_similarity(u, v);
    EXPECT_NEAR(c, cosine_similarity(v, u), 1e-15);
    EmbeddingVector s = u;
    for (double& x : s.values) x *= 3.7;
    EXPECT_NEAR(c, cosine_similarity(s, v), 1e-12);
    EXPECT_LE(std::fabs(c), 1.0);
  }
}

TEST(Cosine, DimensionMismatch) {
  EXPECT_THROW(cosine_similarity(EmbeddingVector{{1, 0}}, EmbeddingVector{{1}}),
               DomainError);
}

TEST(Perplexity, UniformModelGivesVocabularySize) {
  const std::vector<std::string> corpus{"p q r s"};
  const NgramLm lm = train_ngram(corpus, 2, 1.0);
  // Fresh model over the same vocabulary: every context unseen.
  const NgramLm uniform(lm.vocabulary(), 2, 1.0);
  for (const char* text : {"p", "q r s p", "zzz p"}) {
    EXPECT_NEAR(perplexity(text, uniform),
                static_cast<double>(lm.vocabulary().size()), 1e-9);
  }
}

TEST(Perplexity, OneHotModelGivesOne) {
  const Vocabulary v = Vocabulary::from_tokens({"<s>", "</s>", "<unk>", "a", "b"});
  // Deterministic chain a -> b -> </s>.
  const CallbackProvider lm(v, [](std::span<const TokenId> ctx) {
    const TokenId next = ctx.empty() ? 3 : ctx.back() == 3 ? 4 : 1;
    LogitVector l{std::vector<double>(5, -1e4)};
    l.values[next] = 0.0;
    return l;
  });
  EXPECT_NEAR(perplexity("a b", lm), 1.0, 1e-12);
}

TEST(Perplexity, HandSummedAlternatingCorpus) {
  const std::vector<std::string> corpus{"x y x y"};
  const double alpha = 1e-3;
  const NgramLm lm = train_ngram(corpus, 2, alpha);
  const double v = static_cast<double>(lm.vocabulary().size());  // 5
  // Bigram counts: <s>->x 1; x->y 2; y->x 1; y->.</s> 1.
  const double p_x_bos = (1 + alpha) / (1 + alpha * v);
  const double p_y_x = (2 + alpha) / (2 + alpha * v);
  const double p_x_y = (1 + alpha) / (2 + alpha * v);
  const double p_end_y = (1 + alpha) / (2 + alpha * v);
  const double ll = std::log(p_x_bos) + std::log(p_y_x) + std::log(p_x_y) +
                    std::log(p_y_x) + std::log(p_end_y);
  EXPECT_NEAR(perplexity("x y x y", lm), std::exp(-ll / 5), 1e-9);
}

TEST(Perplexity, EmptyTextIsAnError) {
  const std::vector<std::string> corpus{"a"};
  const NgramLm lm = train_ngram(corpus, 2, 0.1);
  EXPECT_THROW(perplexity("", lm), DomainError);
}

Corpus pair_corpus(std::vector<std::string> texts) {
  Corpus c;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    c.push_back({"id" + std::to_string(i), texts[i], "a", "male", 30, "T"});
  }
  return c;
}

TEST(Utility, IdentityScoresOne) {
  const Corpus c = pair_corpus({"the cat sat", "a dog ran far", "x y z w"});
  const std::vector<std::string> texts{"the cat sat", "a dog ran far", "x y z w"};
  const NgramLm lm = train_ngram(texts, 2, 0.1);
  const UtilityReport r = utility_report(c, c, lm);
  EXPECT_NEAR(r.mean_cs, 1.0, 1e-12);
  EXPECT_NEAR(r.mean_bleu, 1.0, 1e-12);
  EXPECT_GE(r.mean_ppl, 1.0);
  EXPECT_EQ(r.models_averaged, 1);
}

TEST(Utility, SingleDocumentMeansEqualRow) {
  const Corpus a = pair_corpus({"one two three four"});
  const Corpus b = pair_corpus({"one three two"});
  const std::vector<std::string> texts{"one two three four"};
  const NgramLm lm = train_ngram(texts, 2, 0.1);
  const UtilityReport r = utility_report(a, b, lm);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.mean_cs, r.rows[0].cs);
  EXPECT_EQ(r.mean_bleu, r.rows[0].bleu);
  EXPECT_EQ(r.mean_ppl, *r.rows[0].ppl);
}

TEST(Utility, MatchesIndependentlyComputedRows) {
  const std::vector<std::string> orig{"red green blue red", "one two three",
                                      "alpha beta"};
  const std::vector<std::string> priv{"red blue", "three two one four", ""};
  const NgramLm lm = train_ngram(orig, 2, 0.1);
  const UtilityReport r = utility_report(pair_corpus(orig), pair_corpus(priv), lm);
  HashedTfidfEmbedder e;
  e.fit(orig);
  double cs = 0, bl = 0, ppl = 0;
  for (int i = 0; i < 3; ++i) {
    cs += cosine_similarity(e.embed(orig[i]), e.embed(priv[i]));
    bl += bleu(priv[i], orig[i]);
  }
  ppl = (perplexity(priv[0], lm) + perplexity(priv[1], lm)) / 2;
  EXPECT_NEAR(r.mean_cs, cs / 3, 1e-9);
  EXPECT_NEAR(r.mean_bleu, bl / 3, 1e-9);
  EXPECT_NEAR(r.mean_ppl, ppl, 1e-9);
  EXPECT_FALSE(r.rows[2].ppl.has_value());
  EXPECT_EQ(r.rows[2].cs, 0.0);
}

TEST(Utility, Misaligned) {
  const std::vector<std::string> texts{"a"};
  const NgramLm lm = train_ngram(texts, 2, 0.1);
  Corpus a = pair_corpus({"a", "b"});
  Corpus b = pair_corpus({"a"});
  EXPECT_THROW(utility_report(a, b, lm), AlignmentError);
  b = pair_corpus({"a", "b"});
  b[1].id = "other";
  EXPECT_THROW(utility_report(a, b, lm), AlignmentError);
}

TEST(PairwiseMean, OrderIndependentWithinRounding) {
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back(1.0 / (i + 1));
  double naive = 0.0;
  for (double x : v) naive += x;
  EXPECT_NEAR(pairwise_mean(v), naive / 1000, 1e-15);
  EXPECT_EQ(pairwise_mean({}), 0.0);
}

}  // namespace
}  // namespace dprewrite
