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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "dprewrite/error.h"

namespace dprewrite {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(name) + " must be positive and finite, got " +
                      std::to_string(value));
  }
}

double max_finite(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  return m;
}

TokenDistribution normalize(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return TokenDistribution{std::move(weights)};
}

}  // namespace

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kDp:
      return "dp";
    case Strategy::kQuasiDp:
      return "quasi-dp";
    case Strategy::kNonDp:
      return "non-dp";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  std::string key;
  for (char c : name) {
    key.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(
                                       static_cast<unsigned char>(c))));
  }
  if (key == "dp") return Strategy::kDp;
  if (key == "quasi-dp" || key == "quasidp") return Strategy::kQuasiDp;
  if (key == "non-dp" || key == "nondp") return Strategy::kNonDp;
  throw DomainError("unknown strategy '" + std::string(name) + "'");
}

void LogitVector::check_finite() const {
  if (values.empty()) throw DomainError("logit vector is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError("logit " + std::to_string(i) + " is not finite");
    }
  }
}

ClipBounds::ClipBounds(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw DomainError("invalid clip bounds (" + std::to_string(lo) + ", " +
                      std::to_string(hi) + ")");
  }
}

ClipBounds default_clip_bounds() {
  return ClipBounds(kDefaultClipLo, kDefaultClipHi);
}

PrivacyParams PrivacyParams::dp(double epsilon, double sensitivity,
                                std::size_t top_k) {
  if (top_k == 0) throw DomainError("top_k must be at least 1");
  PrivacyParams p;
  p.strategy_ = Strategy::kDp;
  p.temperature_ = temperature_from_epsilon(epsilon, sensitivity);
  p.epsilon_ = epsilon;
  p.sensitivity_ = sensitivity;
  p.top_k_ = top_k;
  return p;
}

PrivacyParams PrivacyParams::quasi_dp(double epsilon, double sensitivity,
                                      std::size_t top_k) {
  PrivacyParams p = dp(epsilon, sensitivity, top_k);
  p.strategy_ = Strategy::kQuasiDp;
  return p;
}

PrivacyParams PrivacyParams::non_dp(std::size_t top_k) {
  if (top_k == 0) throw DomainError("top_k must be at least 1");
  PrivacyParams p;
  p.strategy_ = Strategy::kNonDp;
  p.temperature_ = 1.0;
  p.top_k_ = top_k;
  return p;
}

std::vector<TokenId> TokenDistribution::support() const {
  std::vector<TokenId> ids;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] > 0.0) ids.push_back(static_cast<TokenId>(i));
  }
  return ids;
}

double temperature_from_epsilon(double epsilon, double sensitivity) {
  require_positive(epsilon, "epsilon");
  require_positive(sensitivity, "sensitivity");
  return 2.0 * sensitivity / epsilon;
}

double epsilon_from_temperature(double temperature, double sensitivity) {
  require_positive(temperature, "temperature");
  require_positive(sensitivity, "sensitivity");
  return 2.0 * sensitivity / temperature;
}

ClipBounds estimate_clip_bounds(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw DomainError("clip bound estimation needs at least two samples");
  }
  double sum = 0.0;
  for (double x : samples) {
    if (!std::isfinite(x)) throw DomainError("non-finite logit sample");
    sum += x;
  }
  const double n = static_cast<double>(samples.size());
  const double mean = sum / n;
  double sq = 0.0;
  for (double x : samples) sq += (x - mean) * (x - mean);
  const double stddev = std::sqrt(sq / n);
  if (!(stddev > 0.0)) {
    throw DegenerateBoundsError(
        "logit samples are constant; sensitivity would be zero");
  }
  return ClipBounds(mean, mean + 4.0 * stddev);
}

LogitVector clip_logits(const LogitVector& logits, const ClipBounds& bounds) {
  LogitVector out{logits.values};
  for (double& x : out.values) x = std::clamp(x, bounds.lo(), bounds.hi());
  return out;
}

TokenDistribution softmax_with_temperature(const LogitVector& logits,
                                           double temperature) {
  require_positive(temperature, "temperature");
  if (logits.values.empty()) throw DomainError("logit vector is empty");
  const double max = max_finite(logits.values);
  if (!std::isfinite(max)) throw DomainError("no finite logits to normalize");
  std::vector<double> weights(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double x = logits.values[i];
    weights[i] = x == kNegInf ? 0.0 : std::exp((x - max) / temperature);
  }
  return normalize(std::move(weights));
}

TokenDistribution exponential_mechanism_distribution(
    const LogitVector& utilities, double epsilon, double sensitivity) {
  require_positive(epsilon, "epsilon");
  require_positive(sensitivity, "sensitivity");
  if (utilities.values.empty()) throw DomainError("utility vector is empty");
  const double scale = epsilon / (2.0 * sensitivity);
  std::vector<double> scores(utilities.size());
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    scores[i] = scale * utilities.values[i];
  }
  const double top = max_finite(scores);
  for (double& s : scores) s = s == kNegInf ? 0.0 : std::exp(s - top);
  return normalize(std::move(scores));
}

LogitVector top_k_filter(const LogitVector& logits, std::size_t k) {
  if (k == 0) throw DomainError("top_k must be at least 1");
  const std::size_t n = logits.size();
  if (k >= n) return logits;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (logits.values[a] != logits.values[b]) {
                        return logits.values[a] > logits.values[b];
                      }
                      return a < b;
                    });
  LogitVector out{std::vector<double>(n, kNegInf)};
  for (std::size_t i = 0; i < k; ++i) {
    out.values[order[i]] = logits.values[order[i]];
  }
  return out;
}

TokenId sample_token(const TokenDistribution& dist, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  std::size_t last_supported = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.probabilities[i] <= 0.0) continue;
    last_supported = i;
    cumulative += dist.probabilities[i];
    if (u < cumulative) return static_cast<TokenId>(i);
  }
  // Rounding left the total slightly below 1.
  return static_cast<TokenId>(last_supported);
}

TokenId select_token(const LogitVector& logits, const PrivacyParams& params,
                     const ClipBounds& bounds, Rng& rng) {
  if (logits.values.empty()) throw DomainError("logit vector is empty");
  if (logits.size() == 1) return 0;

  LogitVector scaled = logits;
  switch (params.strategy()) {
    case Strategy::kDp: {
      if (!(bounds.sensitivity() > 0.0)) {
        throw DegenerateBoundsError("DP selection needs clip bounds of "
                                    "positive width");
      }
      const double declared = *params.sensitivity();
      if (std::abs(declared - bounds.sensitivity()) >
          1e-9 * std::max(1.0, declared)) {
        throw DomainError("params sensitivity " + std::to_string(declared) +
                          " does not match clip width " +
                          std::to_string(bounds.sensitivity()));
      }
      scaled = clip_logits(logits, bounds);
      [[fallthrough]];
    }
    case Strategy::kQuasiDp:
      for (double& x : scaled.values) x /= params.temperature();
      break;
    case Strategy::kNonDp:
      break;
  }
  const LogitVector kept =
      top_k_filter(scaled, std::min(params.top_k(), scaled.size()));
  return sample_token(softmax_with_temperature(kept, 1.0), rng);
}

double shannon_entropy(const TokenDistribution& dist) {
  double h = 0.0;
  for (double p : dist.probabilities) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace dprewrite
