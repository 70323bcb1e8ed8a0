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

#include "dprewrite/rewriter.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "dprewrite/error.h"
#include "dprewrite/random.h"
#include "json.hpp"

namespace dprewrite {

std::string build_prompt(std::string_view text) {
  std::string prompt;
  prompt.reserve(kPromptPrefix.size() + text.size() + kPromptSuffix.size());
  prompt += kPromptPrefix;
  prompt += text;
  prompt += kPromptSuffix;
  return prompt;
}

RewriteRecord rewrite(std::string_view text, const PrivacyParams& params,
                      const ClipBounds& bounds, const LogitsProvider& provider,
                      const GenerationConfig& config, std::uint64_t seed) {
  if (config.max_new_tokens < 1) {
    throw DomainError("max_new_tokens must be at least 1");
  }
  RewriteRecord record;
  record.original = std::string(text);
  record.prompt = build_prompt(text);
  record.params = params;
  record.seed = seed;

  const Vocabulary& vocab = provider.vocabulary();
  std::vector<TokenId> context = vocab.encode(record.prompt);
  Rng rng(seed);
  while (record.tokens.size() < config.max_new_tokens) {
    LogitVector logits = provider.next_logits(context);
    if (logits.size() != vocab.size()) {
      throw DomainError("provider returned " + std::to_string(logits.size()) +
                        " logits for a vocabulary of " +
                        std::to_string(vocab.size()));
    }
    logits.check_finite();
    const TokenId id = select_token(logits, params, bounds, rng);
    if (id == Vocabulary::kEos && config.stop_at_end) break;
    record.tokens.push_back(id);
    context.push_back(id);
  }
  record.rewritten = vocab.decode(record.tokens);
  if (params.strategy() != Strategy::kNonDp) {
    record.per_token_epsilon = *params.epsilon();
    record.composed_epsilon =
        *params.epsilon() * static_cast<double>(record.tokens.size());
  }
  return record;
}

std::uint64_t derive_document_seed(std::uint64_t seed, std::size_t index) {
  return seed ^ splitmix64(static_cast<std::uint64_t>(index));
}

CorpusRewrite rewrite_corpus(const Corpus& corpus, const PrivacyParams& params,
                             const ClipBounds& bounds,
                             const LogitsProvider& provider,
                             const GenerationConfig& config,
                             std::uint64_t seed) {
  CorpusRewrite out;
  out.documents.resize(corpus.size());
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  std::size_t workers = config.workers != 0
                            ? config.workers
                            : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, (corpus.size() + batch - 1) / batch);

  std::atomic<std::size_t> next_batch{0};
  auto work = [&] {
    for (;;) {
      const std::size_t begin = next_batch.fetch_add(1) * batch;
      if (begin >= corpus.size()) return;
      const std::size_t end = std::min(corpus.size(), begin + batch);
      for (std::size_t i = begin; i < end; ++i) {
        PrivatizedDocument& slot = out.documents[i];
        slot.source = corpus[i];
        const std::uint64_t doc_seed = derive_document_seed(seed, i);
        try {
          slot.record = rewrite(corpus[i].text, params, bounds, provider,
                                config, doc_seed);
        } catch (const std::exception& e) {
          slot.record = RewriteRecord{};
          slot.record.original = corpus[i].text;
          slot.record.prompt = build_prompt(corpus[i].text);
          slot.record.params = params;
          slot.record.seed = doc_seed;
          slot.record.error = e.what();
        }
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& d : out.documents) {
    if (d.record.error) ++out.failures;
  }
  return out;
}

std::string param_label(const PrivacyParams& params) {
  char buf[64];
  if (params.strategy() == Strategy::kNonDp) {
    std::snprintf(buf, sizeof(buf), "%zu", params.top_k());
  } else {
    std::snprintf(buf, sizeof(buf), "%g", *params.epsilon());
  }
  return buf;
}

std::string serialize_privatized(const PrivatizedDocument& doc) {
  const RewriteRecord& r = doc.record;
  const PrivacyParams& p = r.params;
  nlohmann::ordered_json j;
  j["id"] = doc.source.id;
  j["text"] = doc.source.text;
  j["author"] = doc.source.author;
  j["gender"] = doc.source.gender;
  j["age"] = doc.source.age;
  j["topic"] = doc.source.topic;
  j["rewritten"] = r.rewritten;
  j["strategy"] = std::string(to_string(p.strategy()));
  j["param"] = param_label(p);
  j["per_token_epsilon"] =
      r.per_token_epsilon ? nlohmann::ordered_json(*r.per_token_epsilon) : nullptr;
  j["composed_epsilon"] =
      r.composed_epsilon ? nlohmann::ordered_json(*r.composed_epsilon) : nullptr;
  j["seed"] = r.seed;
  j["tokens"] = r.tokens;
  j["temperature"] = p.temperature();
  j["sensitivity"] =
      p.sensitivity() ? nlohmann::ordered_json(*p.sensitivity()) : nullptr;
  j["top_k"] = p.top_k() == kFullVocab ? nlohmann::ordered_json(nullptr)
                                        : nlohmann::ordered_json(p.top_k());
  if (r.error) j["error"] = *r.error;
  return j.dump();
}

PrivatizedDocument parse_privatized(std::string_view line) {
  PrivatizedDocument doc;
  doc.source = parse_document(line);
  try {
    const auto j = nlohmann::json::parse(line);
    RewriteRecord& r = doc.record;
    r.original = doc.source.text;
    r.prompt = build_prompt(r.original);
    r.rewritten = j.at("rewritten").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tokens")) r.tokens = j["tokens"].get<std::vector<TokenId>>();
    const Strategy strategy = parse_strategy(j.at("strategy").get<std::string>());
    const std::size_t top_k = j.contains("top_k") && !j["top_k"].is_null()
                                  ? j["top_k"].get<std::size_t>()
                                  : kFullVocab;
    if (strategy == Strategy::kNonDp) {
      r.params = PrivacyParams::non_dp(top_k);
    } else {
      const double eps = j.at("per_token_epsilon").get<double>();
      const double sens = j.at("sensitivity").get<double>();
      r.params = strategy == Strategy::kDp
                     ? PrivacyParams::dp(eps, sens, top_k)
                     : PrivacyParams::quasi_dp(eps, sens, top_k);
      r.per_token_epsilon = eps;
      r.composed_epsilon = j.at("composed_epsilon").get<double>();
    }
    if (j.contains("error")) r.error = j["error"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed rewrite record: ") + e.what());
  }
  return doc;
}

void save_privatized(const std::filesystem::path& path,
                     const std::vector<PrivatizedDocument>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& d : docs) out << serialize_privatized(d) << '\n';
}

std::vector<PrivatizedDocument> load_privatized(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  std::vector<PrivatizedDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(parse_privatized(line));
    } catch (const Error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return docs;
}

Corpus rewritten_corpus(const std::vector<PrivatizedDocument>& docs) {
  Corpus out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    LabeledDocument doc = d.source;
    doc.text = d.record.rewritten;
    out.push_back(std::move(doc));
  }
  return out;
}

}  // namespace dprewrite
