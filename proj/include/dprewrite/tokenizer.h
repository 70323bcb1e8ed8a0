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

#ifndef DPREWRITE_TOKENIZER_H_
#define DPREWRITE_TOKENIZER_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dprewrite/mechanism.h"

namespace dprewrite {

// Lowercases ASCII, then splits on whitespace and punctuation boundaries.
// A word is a maximal run of ASCII letters, digits or non-ASCII bytes (so
// UTF-8 sequences stay whole); every other non-space character is a token of
// its own.
//
//   tokenize("Hello, World!") == {"hello", ",", "world", "!"}
std::vector<std::string> tokenize(std::string_view text);

// Bijection between token strings and ids. Ids 0, 1, 2 are reserved for
// begin-of-sequence, end-of-sequence and unknown.
class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr std::string_view kBosToken = "<s>";
  static constexpr std::string_view kEosToken = "</s>";
  static constexpr std::string_view kUnkToken = "<unk>";

  // Reserved tokens followed by the distinct tokens of `sequences` and
  // `extra`, sorted bytewise. Throws DomainError if the result has fewer
  // than 4 entries.
  static Vocabulary build(std::span<const std::vector<std::string>> sequences,
                          std::span<const std::string> extra = {});

  // Tokens listed in id order; the first three must be the reserved strings.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  // JSON manifest: {"tokens": ["<s>", "</s>", "<unk>", ...]}.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;
  // Unknown strings map to kUnk.
  TokenId id(std::string_view token) const;
  static bool is_reserved(TokenId id) { return id <= kUnk; }

  std::vector<TokenId> encode(std::string_view text) const;
  // Space-joined; reserved ids are dropped.
  std::string decode(std::span<const TokenId> ids) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  explicit Vocabulary(std::vector<std::string> tokens);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace dprewrite

#endif  // DPREWRITE_TOKENIZER_H_
