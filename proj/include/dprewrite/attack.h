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

#ifndef DPREWRITE_ATTACK_H_
#define DPREWRITE_ATTACK_H_

// Empirical privacy: attribute-inference attackers trained on original or
// rewritten text, macro F1, and the relative gain that trades utility
// against attacker degradation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dprewrite/corpus.h"

namespace dprewrite {

inline constexpr std::size_t kAttackFeatureDim = std::size_t{1} << 18;

// Sorted by index, no duplicates.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
};

// Counts of hashed character 3- to 5-grams of " " + text + " ", in
// kAttackFeatureDim buckets. Empty text gives an empty vector.
SparseVector featurize(std::string_view text);

// featurize() reweighted by smoothed idf learned from a training set, then
// L2-normalized.
class CharNgramTfidf {
 public:
  void fit(std::span<const std::string> texts);
  SparseVector transform(std::string_view text) const;

 private:
  std::vector<float> idf_;  // empty: unit weights
};

struct ClassifierOptions {
  int epochs = 12;
  double learning_rate = 0.5;
};

// Multinomial logistic regression trained by SGD. The seed only fixes the
// visiting order, so training is deterministic given (data, seed).
class Classifier {
 public:
  // Throws DomainError with fewer than two distinct labels or mismatched
  // sizes.
  static Classifier train(std::span<const SparseVector> features,
                          std::span<const std::string> labels,
                          std::uint64_t seed, const ClassifierOptions& options = {});

  // Highest-scoring label; ties go to the label that sorts first.
  std::string predict(const SparseVector& x) const;
  std::vector<double> scores(const SparseVector& x) const;

  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<std::string> classes_;
  std::vector<double> weights_;  // feature-major: weights_[j * C + c]
  std::vector<double> bias_;
};

Classifier train_classifier(std::span<const SparseVector> features,
                            std::span<const std::string> labels,
                            std::uint64_t seed,
                            const ClassifierOptions& options = {});

// Unweighted mean over the classes present in `gold` of
// 2 TP / (2 TP + FP + FN). Throws DomainError on empty or unequal inputs.
double macro_f1(std::span<const std::string> predictions,
                std::span<const std::string> gold);

enum class Attribute { kAuthor, kGender, kAge };
enum class AttackSetting { kStatic, kAdaptive };

std::string_view to_string(Attribute attribute);
std::string_view to_string(AttackSetting setting);
Attribute parse_attribute(std::string_view name);

// Author id, gender, or the age bin label.
std::string attribute_label(const LabeledDocument& doc, Attribute attribute);

struct AttackConfig {
  Attribute attribute = Attribute::kAuthor;
  AttackSetting setting = AttackSetting::kAdaptive;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  double split_ratio = 0.9;
  std::uint64_t split_seed = 42;
  ClassifierOptions classifier;
};

inline constexpr std::string_view kAttackerName =
    "hashed-char-3to5gram-tfidf+logreg";

struct AttackReport {
  Attribute attribute = Attribute::kAuthor;
  AttackSetting setting = AttackSetting::kAdaptive;
  std::vector<double> f1_per_seed;
  double mean_f1 = 0.0;
  std::vector<double> baseline_per_seed;
  double baseline_f1 = 0.0;  // trained and evaluated on original text
  std::string attacker{kAttackerName};
};

// Splits document indices with (split_ratio, split_seed). Per seed: train on
// the original training part, evaluate on the privatized validation part.
// The baseline evaluates the same model on the original validation part.
// Throws AlignmentError unless the corpora carry the same ids in order.
AttackReport run_static_attack(const Corpus& original,
                               const Corpus& privatized,
                               const AttackConfig& config);

// Per seed: train and evaluate on the privatized splits. The baseline does
// the same on the original corpus.
AttackReport run_adaptive_attack(const Corpus& original,
                                 const Corpus& privatized,
                                 const AttackConfig& config);

// gamma = cs_priv / cs_base - f1_priv / f1_base. Throws DomainError unless
// both baselines are positive.
double relative_gain(double cs_priv, double cs_base, double f1_priv,
                     double f1_base);

struct AttributeScores {
  double f1_priv = 0.0;
  double f1_base = 0.0;
};

struct GainReport {
  double cs_priv = 0.0;
  double cs_base = 1.0;
  AttributeScores author_scores, gender_scores, age_scores;
  double author = 0.0;
  double gender = 0.0;
  double age = 0.0;
  double sum = 0.0;
};

// Fills the three gammas and their sum from adaptive F1 scores.
GainReport compute_gains(double cs_priv, double cs_base, AttributeScores author,
                         AttributeScores gender, AttributeScores age);

double cumulative_gain(const GainReport& gains);

}  // namespace dprewrite

#endif  // DPREWRITE_ATTACK_H_
