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

#include "dprewrite/mechanism.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dprewrite/error.h"
#include "dprewrite/random.h"

namespace dprewrite {
namespace {

constexpr double kDelta = 26.71;

double sum(const TokenDistribution& d) {
  return std::accumulate(d.probabilities.begin(), d.probabilities.end(), 0.0);
}

LogitVector random_logits(Rng& rng, std::size_t dim, double lo, double hi) {
  LogitVector l;
  for (std::size_t i = 0; i < dim; ++i) {
    l.values.push_back(lo + (hi - lo) * uniform01(rng));
  }
  return l;
}

TEST(Temperature, FromEpsilonExamples) {
  EXPECT_NEAR(temperature_from_epsilon(25, kDelta), 2.1368, 1e-4);
  EXPECT_NEAR(temperature_from_epsilon(250, kDelta), 0.21368, 1e-5);
  EXPECT_DOUBLE_EQ(temperature_from_epsilon(2 * kDelta, kDelta), 1.0);
}

TEST(Temperature, EpsilonFromTemperatureExamples) {
  EXPECT_NEAR(epsilon_from_temperature(1.0, kDelta), 53.42, 1e-12);
  EXPECT_NEAR(epsilon_from_temperature(2.1368, kDelta), 25.0, 1e-3);
  EXPECT_DOUBLE_EQ(epsilon_from_temperature(2, 1), 1.0);
}

TEST(Temperature, RoundTrips) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double eps = 0.01 + 500 * uniform01(rng);
    const double sens = 0.01 + 50 * uniform01(rng);
    const double back =
        epsilon_from_temperature(temperature_from_epsilon(eps, sens), sens);
    EXPECT_NEAR(back, eps, 1e-12 * eps);
  }
}

TEST(Temperature, RejectsNonPositiveInputs) {
  EXPECT_THROW(temperature_from_epsilon(0, kDelta), DomainError);
  EXPECT_THROW(temperature_from_epsilon(25, -1), DomainError);
  EXPECT_THROW(epsilon_from_temperature(-1, kDelta), DomainError);
  EXPECT_THROW(epsilon_from_temperature(1, 0), DomainError);
}

TEST(ClipBoundsEstimate, MeanPlusFourPopulationStd) {
  const std::vector<double> samples{-2, -1, 1, 2};
  const ClipBounds b = estimate_clip_bounds(samples);
  EXPECT_NEAR(b.lo(), 0.0, 1e-12);
  EXPECT_NEAR(b.hi(), 4 * std::sqrt(2.5), 1e-12);
  EXPECT_NEAR(b.hi(), 6.3246, 1e-4);
}

TEST(ClipBoundsEstimate, ConstantSamplesAreDegenerate) {
  const std::vector<double> samples{1.5, 1.5, 1.5, 1.5};
  EXPECT_THROW(estimate_clip_bounds(samples), DegenerateBoundsError);
  const std::vector<double> one{1.0};
  EXPECT_THROW(estimate_clip_bounds(one), DomainError);
}

TEST(ClipBoundsTest, DefaultsAndValidation) {
  const ClipBounds b = default_clip_bounds();
  EXPECT_DOUBLE_EQ(b.lo(), -19.23);
  EXPECT_DOUBLE_EQ(b.hi(), 7.48);
  EXPECT_NEAR(b.sensitivity(), 26.71, 1e-12);
  EXPECT_THROW(ClipBounds(1, 0), DomainError);
  EXPECT_NO_THROW(ClipBounds(2, 2));
}

TEST(Clip, Examples) {
  const LogitVector out = clip_logits({{-25, 0, 10}}, default_clip_bounds());
  EXPECT_EQ(out.values, (std::vector<double>{-19.23, 0, 7.48}));
  const LogitVector in{{-1, 0, 3}};
  EXPECT_EQ(clip_logits(in, default_clip_bounds()).values, in.values);
  const ClipBounds b(-2, 5);
  EXPECT_EQ(clip_logits({{-3, 6}}, b).values, (std::vector<double>{-2, 5}));
}

TEST(Clip, IdempotentAndWithinSensitivity) {
  Rng rng(11);
  const ClipBounds b = default_clip_bounds();
  for (int i = 0; i < 500; ++i) {
    const LogitVector l = random_logits(rng, 1 + uniform_index(rng, 10), -60, 40);
    const LogitVector once = clip_logits(l, b);
    EXPECT_EQ(clip_logits(once, b).values, once.values);
    const auto [lo, hi] = std::minmax_element(once.values.begin(), once.values.end());
    EXPECT_LE(*hi - *lo, b.sensitivity() + 1e-12);
  }
}

TEST(Softmax, Examples) {
  const TokenDistribution u = softmax_with_temperature({{4, 4, 4}}, 0.3);
  for (double p : u.probabilities) EXPECT_NEAR(p, 1.0 / 3, 1e-15);

  const TokenDistribution d = softmax_with_temperature({{0, std::log(3.0)}}, 1);
  EXPECT_NEAR(d[0], 0.25, 1e-15);
  EXPECT_NEAR(d[1], 0.75, 1e-15);

  const TokenDistribution e = softmax_with_temperature({{0, 1, 2}}, 1);
  EXPECT_NEAR(e[0], 0.0900, 1e-4);
  EXPECT_NEAR(e[1], 0.2447, 1e-4);
  EXPECT_NEAR(e[2], 0.6652, 1e-4);
}

TEST(Softmax, SurvivesLargeMagnitudes) {
  const TokenDistribution d = softmax_with_temperature({{1e6, 1e6 - 1}}, 0.01);
  EXPECT_NEAR(sum(d), 1.0, 1e-12);
  EXPECT_GT(d[0], 0.99);
}

TEST(Softmax, FilteredEntriesGetNoMass) {
  const double inf = std::numeric_limits<double>::infinity();
  const TokenDistribution d = softmax_with_temperature({{1, -inf, 1}}, 2);
  EXPECT_EQ(d[1], 0.0);
  EXPECT_NEAR(d[0], 0.5, 1e-15);
  EXPECT_EQ(d.support(), (std::vector<TokenId>{0, 2}));
}

TEST(ExponentialMechanism, Examples) {
  const TokenDistribution u = exponential_mechanism_distribution({{2, 2}}, 5, 1);
  EXPECT_NEAR(u[0], 0.5, 1e-15);
  const LogitVector l{{0, 1, 2}};
  const TokenDistribution a = exponential_mechanism_distribution(l, 2, 1);
  const TokenDistribution b = softmax_with_temperature(l, 1);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(ExponentialMechanism, EquivalentToTemperatureSampling) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const LogitVector l = random_logits(rng, 2 + uniform_index(rng, 9), -19, 7);
    const double eps = 0.5 + 300 * uniform01(rng);
    const TokenDistribution a = exponential_mechanism_distribution(l, eps, kDelta);
    const TokenDistribution b =
        softmax_with_temperature(l, temperature_from_epsilon(eps, kDelta));
    for (std::size_t k = 0; k < l.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(SoftmaxProperty, ArgmaxInvariantUnderTemperature) {
  Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const LogitVector l = random_logits(rng, 2 + uniform_index(rng, 9), -10, 10);
    const auto want = std::max_element(l.values.begin(), l.values.end()) -
                      l.values.begin();
    for (double t : {0.05, 0.5, 1.0, 3.0, 50.0}) {
      const TokenDistribution d = softmax_with_temperature(l, t);
      EXPECT_EQ(std::max_element(d.probabilities.begin(), d.probabilities.end()) -
                    d.probabilities.begin(),
                want);
      EXPECT_NEAR(sum(d), 1.0, 1e-9);
    }
  }
}

TEST(SoftmaxProperty, EntropyStrictlyIncreasesWithTemperature) {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const LogitVector l = random_logits(rng, 2 + uniform_index(rng, 9), -5, 5);
    double prev = -1.0;
    for (double t = 0.2; t <= 6.0; t *= 1.5) {
      const double h = shannon_entropy(softmax_with_temperature(l, t));
      EXPECT_GT(h, prev);
      prev = h;
    }
  }
}

TEST(TopK, Examples) {
  const LogitVector l{{5, 4, 3, 2}};
  EXPECT_EQ(top_k_filter(l, 4).values, l.values);
  EXPECT_EQ(top_k_filter(l, 9).values, l.values);
  const LogitVector two = top_k_filter(l, 2);
  EXPECT_EQ(two[0], 5);
  EXPECT_EQ(two[1], 4);
  EXPECT_TRUE(std::isinf(two[2]) && two[2] < 0);
  EXPECT_TRUE(std::isinf(two[3]) && two[3] < 0);
}

TEST(TopK, TiesKeepLowestId) {
  const LogitVector out = top_k_filter({{1, 2, 2, 0}}, 2);
  EXPECT_TRUE(std::isfinite(out[1]) && std::isfinite(out[2]));
  EXPECT_FALSE(std::isfinite(out[0]) || std::isfinite(out[3]));
  const LogitVector flat = top_k_filter({{3, 3, 3, 3}}, 2);
  EXPECT_TRUE(std::isfinite(flat[0]) && std::isfinite(flat[1]));
  EXPECT_FALSE(std::isfinite(flat[2]) || std::isfinite(flat[3]));
}

TEST(TopK, RejectsZero) { EXPECT_THROW(top_k_filter({{1, 2}}, 0), DomainError); }

TEST(TopKProperty, SupportIsTheKLargest) {
  Rng rng(29);
  for (int i = 0; i < 300; ++i) {
    const std::size_t dim = 1 + uniform_index(rng, 10);
    LogitVector l;
    // Coarse values so ties are common.
    for (std::size_t j = 0; j < dim; ++j) {
      l.values.push_back(static_cast<double>(uniform_index(rng, 4)));
    }
    const std::size_t k = 1 + uniform_index(rng, 12);
    const LogitVector out = top_k_filter(l, k);
    std::vector<double> kept;
    for (double x : out.values) {
      if (std::isfinite(x)) kept.push_back(x);
    }
    ASSERT_EQ(kept.size(), std::min(k, dim));
    std::vector<double> sorted = l.values;
    std::sort(sorted.rbegin(), sorted.rend());
    sorted.resize(kept.size());
    std::sort(kept.rbegin(), kept.rend());
    EXPECT_EQ(kept, sorted);
  }
}

TEST(Params, Invariants) {
  const PrivacyParams dp = PrivacyParams::dp(25, kDelta);
  EXPECT_EQ(dp.strategy(), Strategy::kDp);
  EXPECT_NEAR(dp.temperature(), 2 * kDelta / 25, 1e-12);
  EXPECT_EQ(dp.top_k(), kDefaultTopK);
  const PrivacyParams q = PrivacyParams::quasi_dp(100, kDelta, 10);
  EXPECT_EQ(q.strategy(), Strategy::kQuasiDp);
  EXPECT_EQ(q.top_k(), 10u);
  const PrivacyParams n = PrivacyParams::non_dp(5);
  EXPECT_FALSE(n.epsilon().has_value());
  EXPECT_EQ(n.temperature(), 1.0);
  EXPECT_THROW(PrivacyParams::non_dp(0), DomainError);
  EXPECT_THROW(PrivacyParams::dp(-1, kDelta), DomainError);
}

TEST(StrategyNames, RoundTrip) {
  for (Strategy s : {Strategy::kDp, Strategy::kQuasiDp, Strategy::kNonDp}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_EQ(parse_strategy("Quasi_DP"), Strategy::kQuasiDp);
  EXPECT_THROW(parse_strategy("laplace"), DomainError);
}

TEST(Select, NonDpSingletonSupport) {
  Rng rng(1);
  const PrivacyParams p = PrivacyParams::non_dp(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(select_token({{9, 0, 0, 0}}, p, default_clip_bounds(), rng), 0u);
  }
}

TEST(Select, SizeOneVocabularyNeedsNoSampling) {
  Rng rng(1);
  const auto before = rng;
  EXPECT_EQ(select_token({{3}}, PrivacyParams::dp(1, kDelta),
                         default_clip_bounds(), rng),
            0u);
  EXPECT_EQ(rng, before);
}

TEST(Select, DpSymmetricPairIsFair) {
  // Both logits clip to the upper bound.
  const LogitVector l{{50, 60}};
  Rng rng(99);
  const PrivacyParams p = PrivacyParams::dp(3, kDelta);
  int zeros = 0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    zeros += select_token(l, p, default_clip_bounds(), rng) == 0;
  }
  EXPECT_NEAR(zeros / double(kDraws), 0.5, 0.01);
}

TEST(Select, DpRejectsDegenerateOrMismatchedBounds) {
  Rng rng(1);
  EXPECT_THROW(select_token({{1, 2}}, PrivacyParams::dp(1, kDelta),
                            ClipBounds(0, 0), rng),
               DegenerateBoundsError);
  EXPECT_THROW(select_token({{1, 2}}, PrivacyParams::dp(1, 3.0),
                            default_clip_bounds(), rng),
               DomainError);
}

TEST(Select, QuasiDpSkipsClipping) {
  // Clipping would make both tokens equally likely; without it token 1
  // dominates.
  const LogitVector l{{100, 200}};
  Rng rng(4);
  const PrivacyParams p = PrivacyParams::quasi_dp(250, kDelta);
  int ones = 0;
  for (int i = 0; i < 1000; ++i) {
    ones += select_token(l, p, default_clip_bounds(), rng) == 1;
  }
  EXPECT_EQ(ones, 1000);
}

TEST(Select, DeterministicGivenSeed) {
  Rng gen(8);
  const LogitVector l = random_logits(gen, 10, -5, 5);
  const PrivacyParams p = PrivacyParams::dp(50, kDelta, 5);
  Rng a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(select_token(l, p, default_clip_bounds(), a),
              select_token(l, p, default_clip_bounds(), b));
  }
}

TEST(Select, KLargerThanVocabMeansWholeVocab) {
  const LogitVector l{{0, 0, 0}};
  Rng rng(2);
  std::vector<int> seen(3);
  for (int i = 0; i < 3000; ++i) {
    ++seen[select_token(l, PrivacyParams::non_dp(50), default_clip_bounds(), rng)];
  }
  for (int c : seen) EXPECT_GT(c, 800);
}

TEST(LogitVectorTest, RejectsNonFinite) {
  EXPECT_THROW((LogitVector{{1, std::nan("")}}.check_finite()), DomainError);
  EXPECT_NO_THROW((LogitVector{{1, 2}}.check_finite()));
}

TEST(Entropy, UniformIsLogN) {
  EXPECT_NEAR(shannon_entropy(softmax_with_temperature({{1, 1, 1, 1}}, 1)),
              std::log(4.0), 1e-12);
}

}  // namespace
}  // namespace dprewrite
