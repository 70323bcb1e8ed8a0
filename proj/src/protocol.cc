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

#include "dprewrite/protocol.h"

#include <cmath>

#include "dprewrite/error.h"
#include "json.hpp"

namespace dprewrite {
namespace {

using nlohmann::json;

json parse_message(std::string_view message) {
  try {
    return json::parse(message);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed message: ") + e.what());
  }
}

void check_not_error(const json& doc) {
  if (doc.is_object() && doc.contains("error")) {
    throw FormatError("server error: " + doc["error"].dump());
  }
}

std::size_t read_vocab_size(const json& doc) {
  if (!doc.contains("vocab_size") || !doc["vocab_size"].is_number_unsigned()) {
    throw FormatError("reply lacks a non-negative integer vocab_size");
  }
  return doc["vocab_size"].get<std::size_t>();
}

}  // namespace

std::string encode_request(const LogitsRequest& request) {
  json doc = json::object();
  std::visit([&](const auto& ctx) { doc["context"] = ctx; }, request.context);
  doc["want"] = request.want;
  return doc.dump() + "\n";
}

LogitsRequest decode_request(std::string_view message) {
  const json doc = parse_message(message);
  if (!doc.is_object()) throw FormatError("request must be a JSON object");
  LogitsRequest request;
  if (doc.contains("want")) {
    if (!doc["want"].is_string()) throw FormatError("'want' must be a string");
    request.want = doc["want"].get<std::string>();
  }
  if (request.want != "logits" && request.want != "vocab") {
    throw FormatError("unsupported 'want': " + request.want);
  }
  if (!doc.contains("context")) {
    if (request.want == "vocab") return request;
    throw FormatError("request lacks 'context'");
  }
  const json& ctx = doc["context"];
  if (ctx.is_string()) {
    request.context = ctx.get<std::string>();
  } else if (ctx.is_array()) {
    std::vector<TokenId> ids;
    for (const json& v : ctx) {
      if (!v.is_number_unsigned()) {
        throw FormatError("context ids must be non-negative integers");
      }
      ids.push_back(v.get<TokenId>());
    }
    request.context = std::move(ids);
  } else {
    throw FormatError("'context' must be a list of ids or a string");
  }
  return request;
}

std::string encode_logits_response(const LogitVector& logits) {
  json doc = json::object();
  doc["vocab_size"] = logits.size();
  doc["logits"] = logits.values;
  return doc.dump() + "\n";
}

LogitVector decode_logits_response(std::string_view message) {
  const json doc = parse_message(message);
  check_not_error(doc);
  const std::size_t vocab_size = read_vocab_size(doc);
  if (!doc.contains("logits") || !doc["logits"].is_array()) {
    throw FormatError("reply lacks a 'logits' array");
  }
  LogitVector logits;
  logits.values.reserve(vocab_size);
  for (const json& v : doc["logits"]) {
    if (!v.is_number()) throw FormatError("non-numeric logit");
    logits.values.push_back(v.get<double>());
  }
  if (logits.size() != vocab_size) {
    throw FormatError("vocab_size " + std::to_string(vocab_size) +
                      " disagrees with " + std::to_string(logits.size()) +
                      " logits");
  }
  for (double x : logits.values) {
    if (!std::isfinite(x)) throw FormatError("non-finite logit in reply");
  }
  return logits;
}

std::string encode_vocab_response(const Vocabulary& vocab) {
  json doc = json::object();
  doc["vocab_size"] = vocab.size();
  doc["tokens"] = vocab.tokens();
  return doc.dump() + "\n";
}

Vocabulary decode_vocab_response(std::string_view message) {
  const json doc = parse_message(message);
  check_not_error(doc);
  const std::size_t vocab_size = read_vocab_size(doc);
  if (!doc.contains("tokens") || !doc["tokens"].is_array()) {
    throw FormatError("reply lacks a 'tokens' array");
  }
  std::vector<std::string> tokens;
  try {
    tokens = doc["tokens"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad token list: ") + e.what());
  }
  if (tokens.size() != vocab_size) {
    throw FormatError("vocab_size disagrees with token list length");
  }
  return Vocabulary::from_tokens(std::move(tokens));
}

std::string encode_error_response(std::string_view message) {
  return json{{"error", std::string(message)}}.dump() + "\n";
}

Response respond(const LogitsProvider& provider, std::string_view message) {
  try {
    const LogitsRequest request = decode_request(message);
    if (request.want == "vocab") {
      return {200, encode_vocab_response(provider.vocabulary())};
    }
    std::vector<TokenId> ids;
    if (const auto* text = std::get_if<std::string>(&request.context)) {
      ids = provider.vocabulary().encode(*text);
    } else {
      ids = std::get<std::vector<TokenId>>(request.context);
      for (TokenId id : ids) {
        if (id >= provider.vocabulary().size()) {
          return {400, encode_error_response("context id " +
                                             std::to_string(id) +
                                             " out of range")};
        }
      }
    }
    return {200, encode_logits_response(provider.next_logits(ids))};
  } catch (const FormatError& e) {
    return {400, encode_error_response(e.what())};
  } catch (const std::exception& e) {
    return {500, encode_error_response(e.what())};
  }
}

}  // namespace dprewrite
