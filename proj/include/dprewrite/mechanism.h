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

#ifndef DPREWRITE_MECHANISM_H_
#define DPREWRITE_MECHANISM_H_

// Token selection for private rewriting: logit clipping, the mapping between
// privacy budget and sampling temperature, the exponential mechanism and
// top-k truncation.
//
// Temperature sampling over logits clipped to a range of width `sensitivity`
// is the exponential mechanism with utility = logit, provided
//
//   epsilon = 2 * sensitivity / temperature.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dprewrite/random.h"

namespace dprewrite {

using TokenId = std::uint32_t;

enum class Strategy {
  kDp,       // clip, then temperature from epsilon, then top-k
  kQuasiDp,  // temperature from epsilon without clipping
  kNonDp,    // plain top-k sampling at temperature 1
};

std::string_view to_string(Strategy strategy);
// Accepts "dp", "quasi-dp", "non-dp" (case-insensitive, '_' for '-').
Strategy parse_strategy(std::string_view name);

// Top-k value meaning "no truncation".
inline constexpr std::size_t kFullVocab = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kDefaultTopK = 50;

// Bounds measured on flan-t5-base logits: (mean, mean + 4 std).
inline constexpr double kDefaultClipLo = -19.23;
inline constexpr double kDefaultClipHi = 7.48;

// Per-step scores over a vocabulary. Entries are finite when they come from a
// provider; top_k_filter marks dropped entries with -infinity.
struct LogitVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }

  // Throws DomainError on an empty vector or a non-finite entry.
  void check_finite() const;
};

class ClipBounds {
 public:
  // Throws DomainError unless lo <= hi and both are finite.
  ClipBounds(double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double sensitivity() const { return hi_ - lo_; }

  friend bool operator==(const ClipBounds&, const ClipBounds&) = default;

 private:
  double lo_;
  double hi_;
};

ClipBounds default_clip_bounds();

class PrivacyParams {
 public:
  // Temperature is derived as 2 * sensitivity / epsilon.
  static PrivacyParams dp(double epsilon, double sensitivity,
                          std::size_t top_k = kDefaultTopK);
  static PrivacyParams quasi_dp(double epsilon, double sensitivity,
                                std::size_t top_k = kDefaultTopK);
  static PrivacyParams non_dp(std::size_t top_k);

  Strategy strategy() const { return strategy_; }
  // Absent for kNonDp.
  std::optional<double> epsilon() const { return epsilon_; }
  std::optional<double> sensitivity() const { return sensitivity_; }
  double temperature() const { return temperature_; }
  std::size_t top_k() const { return top_k_; }

 private:
  PrivacyParams() = default;

  Strategy strategy_ = Strategy::kNonDp;
  std::optional<double> epsilon_;
  std::optional<double> sensitivity_;
  double temperature_ = 1.0;
  std::size_t top_k_ = kDefaultTopK;
};

struct TokenDistribution {
  std::vector<double> probabilities;

  std::size_t size() const { return probabilities.size(); }
  double operator[](std::size_t i) const { return probabilities[i]; }
  // Ids with nonzero mass, ascending.
  std::vector<TokenId> support() const;
};

double temperature_from_epsilon(double epsilon, double sensitivity);
double epsilon_from_temperature(double temperature, double sensitivity);

// lo = mean, hi = mean + 4 * population standard deviation. Needs at least
// two finite samples; throws DegenerateBoundsError when all samples are equal.
ClipBounds estimate_clip_bounds(std::span<const double> samples);

LogitVector clip_logits(const LogitVector& logits, const ClipBounds& bounds);

// p_i = exp(l_i / T) / sum_j exp(l_j / T), evaluated after subtracting the
// maximum. Entries equal to -infinity receive zero mass.
TokenDistribution softmax_with_temperature(const LogitVector& logits,
                                           double temperature);

// p_i proportional to exp(epsilon * u_i / (2 * sensitivity)). Written
// independently of softmax_with_temperature so each can check the other.
TokenDistribution exponential_mechanism_distribution(
    const LogitVector& utilities, double epsilon, double sensitivity);

// Keeps the min(k, size) largest entries; the rest become -infinity. Ties at
// the cut keep the lower id. Requires k >= 1.
LogitVector top_k_filter(const LogitVector& logits, std::size_t k);

// Inverse-CDF draw from `dist` using one uniform01 sample.
TokenId sample_token(const TokenDistribution& dist, Rng& rng);

// One private decoding step.
//   kDp:      clip -> divide by T -> top-k -> sample
//   kQuasiDp: divide by T -> top-k -> sample
//   kNonDp:   top-k -> sample
// `bounds` is only read on the kDp path, where its width must be positive and
// match params.sensitivity().
TokenId select_token(const LogitVector& logits, const PrivacyParams& params,
                     const ClipBounds& bounds, Rng& rng);

double shannon_entropy(const TokenDistribution& dist);

}  // namespace dprewrite

#endif  // DPREWRITE_MECHANISM_H_
