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

#ifndef DPREWRITE_LM_PROVIDER_H_
#define DPREWRITE_LM_PROVIDER_H_

// Sources of next-token logits. The rewriter only sees LogitsProvider, so a
// local n-gram model and a remote model server are interchangeable.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dprewrite/mechanism.h"
#include "dprewrite/tokenizer.h"

namespace dprewrite {

class LogitsProvider {
 public:
  virtual ~LogitsProvider() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  // Scores for the token following `context`; size() == vocabulary().size().
  // Implementations must be safe to call concurrently.
  virtual LogitVector next_logits(std::span<const TokenId> context) const = 0;
  // "local-ngram", "remote", ...
  virtual std::string kind() const = 0;
};

using ProviderHandle = std::shared_ptr<const LogitsProvider>;

// Add-alpha smoothed n-gram model over a closed vocabulary:
//
//   logit_i = ln((count(ctx, i) + alpha) / (sum_j count(ctx, j) + alpha * V))
//
// where ctx is the last order-1 tokens, left-padded with <s>. Immutable after
// training.
class NgramLm final : public LogitsProvider {
 public:
  // A model with no counts; every context is uniform.
  NgramLm(Vocabulary vocab, int order, double alpha);

  const Vocabulary& vocabulary() const override { return vocab_; }
  LogitVector next_logits(std::span<const TokenId> context) const override;
  std::string kind() const override { return "local-ngram"; }

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  std::uint64_t count(std::span<const TokenId> context, TokenId next) const;
  std::uint64_t context_total(std::span<const TokenId> context) const;

  // Counts every n-gram of <s>^(order-1) ids </s>.
  void add_sequence(std::span<const TokenId> ids);

 private:
  struct ContextCounts {
    std::unordered_map<TokenId, std::uint64_t> next;
    std::uint64_t total = 0;
  };
  struct KeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const;
  };

  std::vector<TokenId> history(std::span<const TokenId> context) const;
  const ContextCounts* find(std::span<const TokenId> context) const;

  Vocabulary vocab_;
  int order_;
  double alpha_;
  std::unordered_map<std::vector<TokenId>, ContextCounts, KeyHash> table_;
};

// Tokenizes `texts`, builds the vocabulary (plus `extra_tokens`) and counts.
// Throws DomainError on an empty corpus, order < 1 or alpha <= 0.
NgramLm train_ngram(std::span<const std::string> texts, int order,
                    double alpha, std::span<const std::string> extra_tokens = {});

// Mixes a base model with a copy distribution over the document embedded in
// a rewrite prompt:
//
//   p = (1 - w) * softmax(base) + w * copy,   logits = ln p.
//
// The document is the span between the first "Document :" and the last
// "Paraphrase of Document :" in the context; tokens after that are the
// rewrite so far. `copy` puts its mass on the tokens that follow the longest
// (up to 3 tokens) suffix of the rewrite inside the document, with </s> after
// the document's last token. Without a match it spreads over the document's
// tokens and </s>. Contexts without the prompt markers get the base logits.
//
// This turns a causal n-gram into a rough paraphraser so that the privacy
// knobs have something to degrade.
class CopyAugmentedProvider final : public LogitsProvider {
 public:
  CopyAugmentedProvider(ProviderHandle base, double copy_weight);

  const Vocabulary& vocabulary() const override { return base_->vocabulary(); }
  LogitVector next_logits(std::span<const TokenId> context) const override;
  std::string kind() const override { return base_->kind(); }

  double copy_weight() const { return copy_weight_; }

  // Copy probabilities over the vocabulary; empty when the context holds no
  // prompt.
  std::vector<double> copy_distribution(std::span<const TokenId> context) const;

 private:

  ProviderHandle base_;
  double copy_weight_;
  std::vector<TokenId> prefix_ids_;
  std::vector<TokenId> suffix_ids_;
  bool markers_known_ = false;
};

// Logits computed by a caller-supplied function. Used for fixtures, such as a
// one-hot provider that walks a fixed path or an echo of a constant vector.
class CallbackProvider final : public LogitsProvider {
 public:
  using Callback = std::function<LogitVector(std::span<const TokenId>)>;

  CallbackProvider(Vocabulary vocab, Callback callback,
                   std::string kind = "fixture");

  const Vocabulary& vocabulary() const override { return vocab_; }
  LogitVector next_logits(std::span<const TokenId> context) const override;
  std::string kind() const override { return kind_; }

 private:
  Vocabulary vocab_;
  Callback callback_;
  std::string kind_;
};

// Constant vector for every context.
ProviderHandle make_echo_provider(Vocabulary vocab, LogitVector logits);

struct RemoteOptions {
  std::chrono::milliseconds timeout{10000};
  int max_attempts = 3;
};

// Client for the logits wire protocol (see protocol.h). The constructor
// fetches the vocabulary, so a handle always refers to a reachable server.
// Requests are serialized per instance.
class RemoteProvider final : public LogitsProvider {
 public:
  explicit RemoteProvider(std::string endpoint, RemoteOptions options = {});
  ~RemoteProvider() override;

  const Vocabulary& vocabulary() const override;
  LogitVector next_logits(std::span<const TokenId> context) const override;
  std::string kind() const override { return "remote"; }

  const std::string& endpoint() const { return endpoint_; }

 private:
  struct Impl;
  std::string post(const std::string& body) const;

  std::string endpoint_;
  RemoteOptions options_;
  std::unique_ptr<Impl> impl_;
  std::unique_ptr<Vocabulary> vocab_;
};

ProviderHandle make_local_provider(NgramLm lm, double copy_weight = 0.0);
ProviderHandle make_remote_provider(std::string endpoint,
                                    RemoteOptions options = {});

// ln softmax of `logits`, with max subtraction.
std::vector<double> log_softmax(const LogitVector& logits);

}  // namespace dprewrite

#endif  // DPREWRITE_LM_PROVIDER_H_
