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

#ifndef DPREWRITE_REWRITER_H_
#define DPREWRITE_REWRITER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dprewrite/corpus.h"
#include "dprewrite/lm_provider.h"
#include "dprewrite/mechanism.h"
#include "dprewrite/prompt.h"

namespace dprewrite {

struct GenerationConfig {
  std::size_t max_new_tokens = 64;
  bool stop_at_end = true;
  // Documents handed to a worker at a time. Does not affect outputs.
  std::size_t batch_size = 16;
  // 0 means std::thread::hardware_concurrency().
  std::size_t workers = 0;
};

struct RewriteRecord {
  std::string original;
  std::string prompt;
  std::vector<TokenId> tokens;  // emitted ids, excluding a final </s>
  std::string rewritten;
  PrivacyParams params = PrivacyParams::non_dp(kDefaultTopK);
  // Both absent for kNonDp. composed = per_token * tokens.size() (basic
  // sequential composition; reported, not claimed as a document guarantee).
  std::optional<double> per_token_epsilon;
  std::optional<double> composed_epsilon;
  std::uint64_t seed = 0;
  std::optional<std::string> error;
};

// Generates a rewrite token by token:
//   context = encode(build_prompt(text)) + emitted
//   id = select_token(provider.next_logits(context), params, bounds, rng)
// stopping at </s> (when config.stop_at_end) or after max_new_tokens. The rng
// is mt19937_64(seed). Provider errors propagate.
RewriteRecord rewrite(std::string_view text, const PrivacyParams& params,
                      const ClipBounds& bounds, const LogitsProvider& provider,
                      const GenerationConfig& config, std::uint64_t seed);

// seed ^ splitmix64(index).
std::uint64_t derive_document_seed(std::uint64_t seed, std::size_t index);

struct PrivatizedDocument {
  LabeledDocument source;
  RewriteRecord record;
};

struct CorpusRewrite {
  std::vector<PrivatizedDocument> documents;  // input order
  std::size_t failures = 0;
};

// Rewrites every document with its derived seed, fanning out over
// config.workers threads. A failing document keeps an error in its record
// and the run continues.
CorpusRewrite rewrite_corpus(const Corpus& corpus, const PrivacyParams& params,
                             const ClipBounds& bounds,
                             const LogitsProvider& provider,
                             const GenerationConfig& config,
                             std::uint64_t seed);

// "25" for epsilon 25, "50" for k = 50; the grid-point label used in file
// names and reports.
std::string param_label(const PrivacyParams& params);

// One JSON line: the source fields followed by rewritten, strategy, param,
// per_token_epsilon, composed_epsilon, seed (and error when present).
std::string serialize_privatized(const PrivatizedDocument& doc);
PrivatizedDocument parse_privatized(std::string_view line);

void save_privatized(const std::filesystem::path& path,
                     const std::vector<PrivatizedDocument>& docs);
// Throws FormatError on any malformed line.
std::vector<PrivatizedDocument> load_privatized(
    const std::filesystem::path& path);

// Source documents with text replaced by the rewrite.
Corpus rewritten_corpus(const std::vector<PrivatizedDocument>& docs);

}  // namespace dprewrite

#endif  // DPREWRITE_REWRITER_H_
