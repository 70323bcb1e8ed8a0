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

#include "dprewrite/lm_provider.h"

#include <algorithm>
#include <cmath>

#include "dprewrite/error.h"
#include "dprewrite/prompt.h"
#include "dprewrite/random.h"

namespace dprewrite {
namespace {

// First index at or after `from` where `needle` occurs in `hay`, or npos.
std::size_t find_seq(std::span<const TokenId> hay, std::span<const TokenId> needle,
                     std::size_t from) {
  if (needle.empty() || hay.size() < needle.size()) return std::string::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + i)) return i;
  }
  return std::string::npos;
}

std::size_t rfind_seq(std::span<const TokenId> hay,
                      std::span<const TokenId> needle, std::size_t from) {
  std::size_t found = std::string::npos;
  for (std::size_t i = find_seq(hay, needle, from); i != std::string::npos;
       i = find_seq(hay, needle, i + 1)) {
    found = i;
  }
  return found;
}

}  // namespace

std::vector<double> log_softmax(const LogitVector& logits) {
  double max = -std::numeric_limits<double>::infinity();
  for (double x : logits.values) max = std::max(max, x);
  double total = 0.0;
  for (double x : logits.values) total += std::exp(x - max);
  const double log_z = max + std::log(total);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logits.values[i] - log_z;
  return out;
}

std::size_t NgramLm::KeyHash::operator()(
    const std::vector<TokenId>& key) const {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (TokenId id : key) h = splitmix64(h ^ id);
  return static_cast<std::size_t>(h);
}

NgramLm::NgramLm(Vocabulary vocab, int order, double alpha)
    : vocab_(std::move(vocab)), order_(order), alpha_(alpha) {
  if (order < 1) throw DomainError("n-gram order must be at least 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("smoothing constant must be positive");
  }
}

std::vector<TokenId> NgramLm::history(std::span<const TokenId> context) const {
  const std::size_t want = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> key(want, Vocabulary::kBos);
  const std::size_t take = std::min(want, context.size());
  std::copy(context.end() - static_cast<long>(take), context.end(),
            key.end() - static_cast<long>(take));
  return key;
}

const NgramLm::ContextCounts* NgramLm::find(
    std::span<const TokenId> context) const {
  auto it = table_.find(history(context));
  return it == table_.end() ? nullptr : &it->second;
}

void NgramLm::add_sequence(std::span<const TokenId> ids) {
  std::vector<TokenId> padded(static_cast<std::size_t>(order_ - 1),
                              Vocabulary::kBos);
  padded.insert(padded.end(), ids.begin(), ids.end());
  padded.push_back(Vocabulary::kEos);
  const std::size_t h = static_cast<std::size_t>(order_ - 1);
  for (std::size_t i = h; i < padded.size(); ++i) {
    if (padded[i] >= vocab_.size()) {
      throw DomainError("token id out of vocabulary range");
    }
    std::vector<TokenId> key(padded.begin() + static_cast<long>(i - h),
                             padded.begin() + static_cast<long>(i));
    ContextCounts& slot = table_[std::move(key)];
    ++slot.next[padded[i]];
    ++slot.total;
  }
}

std::uint64_t NgramLm::count(std::span<const TokenId> context,
                             TokenId next) const {
  const ContextCounts* slot = find(context);
  if (slot == nullptr) return 0;
  auto it = slot->next.find(next);
  return it == slot->next.end() ? 0 : it->second;
}

std::uint64_t NgramLm::context_total(std::span<const TokenId> context) const {
  const ContextCounts* slot = find(context);
  return slot == nullptr ? 0 : slot->total;
}

LogitVector NgramLm::next_logits(std::span<const TokenId> context) const {
  const std::size_t v = vocab_.size();
  for (TokenId id : context) {
    if (id >= v) throw DomainError("context id " + std::to_string(id) + " outside vocabulary");
  }
  const ContextCounts* slot = find(context);
  const double total = slot == nullptr ? 0.0 : static_cast<double>(slot->total);
  const double log_denominator =
      std::log(total + alpha_ * static_cast<double>(v));
  LogitVector logits{std::vector<double>(v, std::log(alpha_) - log_denominator)};
  if (slot != nullptr) {
    for (const auto& [id, c] : slot->next) {
      logits.values[id] =
          std::log(static_cast<double>(c) + alpha_) - log_denominator;
    }
  }
  return logits;
}

NgramLm train_ngram(std::span<const std::string> texts, int order,
                    double alpha, std::span<const std::string> extra_tokens) {
  if (texts.empty()) throw DomainError("cannot train on an empty corpus");
  std::vector<std::vector<std::string>> sequences;
  sequences.reserve(texts.size());
  for (const auto& t : texts) sequences.push_back(tokenize(t));
  NgramLm lm(Vocabulary::build(sequences, extra_tokens), order, alpha);
  for (const auto& seq : sequences) {
    std::vector<TokenId> ids;
    ids.reserve(seq.size());
    for (const auto& tok : seq) ids.push_back(lm.vocabulary().id(tok));
    lm.add_sequence(ids);
  }
  return lm;
}

CopyAugmentedProvider::CopyAugmentedProvider(ProviderHandle base,
                                             double copy_weight)
    : base_(std::move(base)), copy_weight_(copy_weight) {
  if (!base_) throw DomainError("copy provider needs a base provider");
  if (!(copy_weight >= 0.0 && copy_weight < 1.0)) {
    throw DomainError("copy weight must lie in [0, 1)");
  }
  const Vocabulary& vocab = base_->vocabulary();
  prefix_ids_ = vocab.encode(kPromptPrefix);
  suffix_ids_ = vocab.encode(kPromptSuffix);
  markers_known_ = !prefix_ids_.empty() && !suffix_ids_.empty();
  for (TokenId id : prefix_ids_) markers_known_ &= id != Vocabulary::kUnk;
  for (TokenId id : suffix_ids_) markers_known_ &= id != Vocabulary::kUnk;
}

std::vector<double> CopyAugmentedProvider::copy_distribution(
    std::span<const TokenId> context) const {
  if (!markers_known_) return {};
  const std::size_t start = find_seq(context, prefix_ids_, 0);
  if (start == std::string::npos) return {};
  const std::size_t doc_begin = start + prefix_ids_.size();
  const std::size_t marker = rfind_seq(context, suffix_ids_, doc_begin);
  if (marker == std::string::npos) return {};

  const auto source = context.subspan(doc_begin, marker - doc_begin);
  const auto emitted = context.subspan(marker + suffix_ids_.size());
  std::vector<double> q(base_->vocabulary().size(), 0.0);
  auto next_after = [&](std::size_t j) {
    return j + 1 < source.size() ? source[j + 1] : Vocabulary::kEos;
  };

  if (source.empty()) {
    q[Vocabulary::kEos] = 1.0;
    return q;
  }
  if (emitted.empty()) {
    q[source[0]] = 1.0;
    return q;
  }
  constexpr std::size_t kMaxMatch = 3;
  for (std::size_t m = std::min(kMaxMatch, emitted.size()); m >= 1; --m) {
    const auto tail = emitted.subspan(emitted.size() - m);
    double hits = 0.0;
    for (std::size_t j = m - 1; j < source.size(); ++j) {
      if (std::equal(tail.begin(), tail.end(),
                     source.begin() + static_cast<long>(j + 1 - m))) {
        q[next_after(j)] += 1.0;
        hits += 1.0;
      }
    }
    if (hits > 0.0) {
      for (double& x : q) x /= hits;
      return q;
    }
  }
  // Lost track of the document: fall back to its bag of tokens.
  for (TokenId id : source) q[id] += 1.0;
  q[Vocabulary::kEos] += 1.0;
  const double total = static_cast<double>(source.size() + 1);
  for (double& x : q) x /= total;
  return q;
}

LogitVector CopyAugmentedProvider::next_logits(
    std::span<const TokenId> context) const {
  LogitVector base = base_->next_logits(context);
  if (copy_weight_ == 0.0) return base;
  const std::vector<double> q = copy_distribution(context);
  if (q.empty()) return base;
  const std::vector<double> log_p = log_softmax(base);
  LogitVector mixed{std::vector<double>(base.size())};
  for (std::size_t i = 0; i < base.size(); ++i) {
    mixed.values[i] = std::log((1.0 - copy_weight_) * std::exp(log_p[i]) +
                               copy_weight_ * q[i]);
  }
  return mixed;
}

CallbackProvider::CallbackProvider(Vocabulary vocab, Callback callback,
                                   std::string kind)
    : vocab_(std::move(vocab)),
      callback_(std::move(callback)),
      kind_(std::move(kind)) {}

LogitVector CallbackProvider::next_logits(
    std::span<const TokenId> context) const {
  LogitVector logits = callback_(context);
  if (logits.size() != vocab_.size()) {
    throw DomainError("fixture returned " + std::to_string(logits.size()) +
                      " logits for a vocabulary of " +
                      std::to_string(vocab_.size()));
  }
  return logits;
}

ProviderHandle make_echo_provider(Vocabulary vocab, LogitVector logits) {
  logits.check_finite();
  if (logits.size() != vocab.size()) {
    throw DomainError("echo vector length must equal vocabulary size");
  }
  return std::make_shared<CallbackProvider>(
      std::move(vocab),
      [logits = std::move(logits)](std::span<const TokenId>) { return logits; },
      "echo");
}

ProviderHandle make_local_provider(NgramLm lm, double copy_weight) {
  auto base = std::make_shared<const NgramLm>(std::move(lm));
  if (copy_weight == 0.0) return base;
  return std::make_shared<CopyAugmentedProvider>(std::move(base), copy_weight);
}

}  // namespace dprewrite
