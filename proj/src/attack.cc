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

#include "dprewrite/attack.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "dprewrite/error.h"
#include "dprewrite/random.h"

namespace dprewrite {
namespace {

constexpr std::uint32_t kFeatureMask =
    static_cast<std::uint32_t>(kAttackFeatureDim - 1);

void check_aligned(const Corpus& original, const Corpus& privatized) {
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
}

std::vector<std::string> gather_texts(const Corpus& corpus,
                                      std::span<const std::size_t> idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(corpus[i].text);
  return out;
}

std::vector<std::string> gather_labels(const Corpus& corpus,
                                       std::span<const std::size_t> idx,
                                       Attribute attribute) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(attribute_label(corpus[i], attribute));
  return out;
}

struct FittedAttacker {
  CharNgramTfidf features;
  Classifier model;

  double score(std::span<const std::string> texts,
               std::span<const std::string> gold) const {
    std::vector<std::string> predictions;
    predictions.reserve(texts.size());
    for (const auto& t : texts) {
      predictions.push_back(model.predict(features.transform(t)));
    }
    return macro_f1(predictions, gold);
  }
};

FittedAttacker fit_attacker(std::span<const std::string> texts,
                            std::span<const std::string> labels,
                            std::uint64_t seed,
                            const ClassifierOptions& options) {
  FittedAttacker a;
  a.features.fit(texts);
  std::vector<SparseVector> x;
  x.reserve(texts.size());
  for (const auto& t : texts) x.push_back(a.features.transform(t));
  a.model = Classifier::train(x, labels, seed, options);
  return a;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SparseVector featurize(std::string_view text) {
  SparseVector out;
  if (text.empty()) return out;
  std::string padded;
  padded.reserve(text.size() + 2);
  padded.push_back(' ');
  padded.append(text);
  padded.push_back(' ');

  std::map<std::uint32_t, double> counts;
  for (std::size_t n = 3; n <= 5; ++n) {
    if (padded.size() < n) break;
    // Different n get different hash bases so "abc" and "abc " stay apart.
    const std::uint64_t basis = splitmix64(n);
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
      const auto h = fnv1a64(std::string_view(padded).substr(i, n), basis);
      counts[static_cast<std::uint32_t>(h) & kFeatureMask] += 1.0;
    }
  }
  out.index.reserve(counts.size());
  out.value.reserve(counts.size());
  for (const auto& [i, c] : counts) {
    out.index.push_back(i);
    out.value.push_back(c);
  }
  return out;
}

void CharNgramTfidf::fit(std::span<const std::string> texts) {
  std::vector<std::uint32_t> df(kAttackFeatureDim, 0);
  for (const auto& t : texts) {
    for (std::uint32_t i : featurize(t).index) ++df[i];
  }
  const double n = static_cast<double>(texts.size());
  idf_.resize(kAttackFeatureDim);
  for (std::size_t i = 0; i < kAttackFeatureDim; ++i) {
    idf_[i] = static_cast<float>(std::log((1.0 + n) / (1.0 + df[i])) + 1.0);
  }
}

SparseVector CharNgramTfidf::transform(std::string_view text) const {
  SparseVector v = featurize(text);
  double norm = 0.0;
  for (std::size_t k = 0; k < v.nnz(); ++k) {
    const double w = idf_.empty() ? 1.0 : idf_[v.index[k]];
    v.value[k] = (1.0 + std::log(v.value[k])) * w;
    norm += v.value[k] * v.value[k];
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v.value) x /= norm;
  }
  return v;
}

Classifier Classifier::train(std::span<const SparseVector> features,
                             std::span<const std::string> labels,
                             std::uint64_t seed,
                             const ClassifierOptions& options) {
  if (features.size() != labels.size()) {
    throw DomainError("features and labels differ in length");
  }
  if (options.epochs < 1 || !(options.learning_rate > 0.0)) {
    throw DomainError("classifier needs epochs >= 1 and learning_rate > 0");
  }
  const std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() < 2) {
    throw DomainError("training data has " + std::to_string(unique.size()) +
                      " distinct label(s); need at least 2");
  }
  Classifier m;
  m.classes_.assign(unique.begin(), unique.end());
  const std::size_t c_count = m.classes_.size();
  std::vector<std::size_t> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = static_cast<std::size_t>(
        std::lower_bound(m.classes_.begin(), m.classes_.end(), labels[i]) -
        m.classes_.begin());
  }
  m.weights_.assign(kAttackFeatureDim * c_count, 0.0);
  m.bias_.assign(c_count, 0.0);

  Rng rng(seed);
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> p(c_count);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    const double lr = options.learning_rate / std::sqrt(1.0 + epoch);
    for (std::size_t i : order) {
      const SparseVector& x = features[i];
      p = m.scores(x);
      const double top = *std::max_element(p.begin(), p.end());
      double z = 0.0;
      for (double& s : p) z += (s = std::exp(s - top));
      for (std::size_t c = 0; c < c_count; ++c) {
        const double g = p[c] / z - (c == y[i] ? 1.0 : 0.0);
        m.bias_[c] -= lr * g;
        for (std::size_t k = 0; k < x.nnz(); ++k) {
          m.weights_[x.index[k] * c_count + c] -= lr * g * x.value[k];
        }
      }
    }
  }
  return m;
}

std::vector<double> Classifier::scores(const SparseVector& x) const {
  const std::size_t c_count = classes_.size();
  std::vector<double> s(bias_);
  for (std::size_t k = 0; k < x.nnz(); ++k) {
    const double* w = &weights_[x.index[k] * c_count];
    for (std::size_t c = 0; c < c_count; ++c) s[c] += w[c] * x.value[k];
  }
  return s;
}

std::string Classifier::predict(const SparseVector& x) const {
  const std::vector<double> s = scores(x);
  // max_element returns the first maximum, i.e. the smallest label.
  return classes_[static_cast<std::size_t>(
      std::max_element(s.begin(), s.end()) - s.begin())];
}

Classifier train_classifier(std::span<const SparseVector> features,
                            std::span<const std::string> labels,
                            std::uint64_t seed,
                            const ClassifierOptions& options) {
  return Classifier::train(features, labels, seed, options);
}

double macro_f1(std::span<const std::string> predictions,
                std::span<const std::string> gold) {
  if (predictions.size() != gold.size()) {
    throw DomainError("predictions and gold labels differ in length");
  }
  if (gold.empty()) throw DomainError("macro F1 of an empty evaluation set");
  struct Counts {
    long tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts> per_class;
  for (const auto& g : gold) per_class[g];
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predictions[i] == gold[i]) {
      ++per_class[gold[i]].tp;
    } else {
      ++per_class[gold[i]].fn;
      auto it = per_class.find(predictions[i]);
      if (it != per_class.end()) ++it->second.fp;
    }
  }
  double sum = 0.0;
  for (const auto& [label, c] : per_class) {
    const long denom = 2 * c.tp + c.fp + c.fn;
    sum += denom > 0 ? 2.0 * static_cast<double>(c.tp) / denom : 0.0;
  }
  return sum / static_cast<double>(per_class.size());
}

std::string_view to_string(Attribute attribute) {
  switch (attribute) {
    case Attribute::kAuthor:
      return "author";
    case Attribute::kGender:
      return "gender";
    case Attribute::kAge:
      return "age";
  }
  return "?";
}

std::string_view to_string(AttackSetting setting) {
  return setting == AttackSetting::kStatic ? "static" : "adaptive";
}

Attribute parse_attribute(std::string_view name) {
  if (name == "author") return Attribute::kAuthor;
  if (name == "gender") return Attribute::kGender;
  if (name == "age") return Attribute::kAge;
  throw DomainError("unknown attribute '" + std::string(name) + "'");
}

std::string attribute_label(const LabeledDocument& doc, Attribute attribute) {
  switch (attribute) {
    case Attribute::kAuthor:
      return doc.author;
    case Attribute::kGender:
      return doc.gender;
    case Attribute::kAge:
      return std::string(bin_age(doc.age).label);
  }
  return {};
}

AttackReport run_static_attack(const Corpus& original,
                               const Corpus& privatized,
                               const AttackConfig& config) {
  check_aligned(original, privatized);
  const SplitIndices s =
      split_indices(original.size(), config.split_ratio, config.split_seed);
  if (s.val.empty()) throw DomainError("validation split is empty");
  const auto train_x = gather_texts(original, s.train);
  const auto train_y = gather_labels(original, s.train, config.attribute);
  const auto val_orig = gather_texts(original, s.val);
  const auto val_priv = gather_texts(privatized, s.val);
  const auto val_y = gather_labels(original, s.val, config.attribute);

  AttackReport r;
  r.attribute = config.attribute;
  r.setting = AttackSetting::kStatic;
  for (std::uint64_t seed : config.seeds) {
    const FittedAttacker a =
        fit_attacker(train_x, train_y, seed, config.classifier);
    r.f1_per_seed.push_back(a.score(val_priv, val_y));
    r.baseline_per_seed.push_back(a.score(val_orig, val_y));
  }
  r.mean_f1 = mean(r.f1_per_seed);
  r.baseline_f1 = mean(r.baseline_per_seed);
  return r;
}

AttackReport run_adaptive_attack(const Corpus& original,
                                 const Corpus& privatized,
                                 const AttackConfig& config) {
  check_aligned(original, privatized);
  const SplitIndices s =
      split_indices(original.size(), config.split_ratio, config.split_seed);
  if (s.val.empty()) throw DomainError("validation split is empty");
  const auto train_y = gather_labels(original, s.train, config.attribute);
  const auto val_y = gather_labels(original, s.val, config.attribute);
  const auto train_orig = gather_texts(original, s.train);
  const auto train_priv = gather_texts(privatized, s.train);
  const auto val_orig = gather_texts(original, s.val);
  const auto val_priv = gather_texts(privatized, s.val);

  AttackReport r;
  r.attribute = config.attribute;
  r.setting = AttackSetting::kAdaptive;
  for (std::uint64_t seed : config.seeds) {
    const FittedAttacker priv =
        fit_attacker(train_priv, train_y, seed, config.classifier);
    r.f1_per_seed.push_back(priv.score(val_priv, val_y));
    const FittedAttacker base =
        fit_attacker(train_orig, train_y, seed, config.classifier);
    r.baseline_per_seed.push_back(base.score(val_orig, val_y));
  }
  r.mean_f1 = mean(r.f1_per_seed);
  r.baseline_f1 = mean(r.baseline_per_seed);
  return r;
}

double relative_gain(double cs_priv, double cs_base, double f1_priv,
                     double f1_base) {
  if (!(cs_base > 0.0) || !(f1_base > 0.0)) {
    throw DomainError("relative gain needs positive baseline CS and F1");
  }
  return cs_priv / cs_base - f1_priv / f1_base;
}

GainReport compute_gains(double cs_priv, double cs_base, AttributeScores author,
                         AttributeScores gender, AttributeScores age) {
  GainReport g;
  g.cs_priv = cs_priv;
  g.cs_base = cs_base;
  g.author_scores = author;
  g.gender_scores = gender;
  g.age_scores = age;
  g.author = relative_gain(cs_priv, cs_base, author.f1_priv, author.f1_base);
  g.gender = relative_gain(cs_priv, cs_base, gender.f1_priv, gender.f1_base);
  g.age = relative_gain(cs_priv, cs_base, age.f1_priv, age.f1_base);
  g.sum = cumulative_gain(g);
  return g;
}

double cumulative_gain(const GainReport& gains) {
  return gains.author + gains.gender + gains.age;
}

}  // namespace dprewrite
