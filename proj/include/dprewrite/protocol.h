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

#ifndef DPREWRITE_PROTOCOL_H_
#define DPREWRITE_PROTOCOL_H_

// Logits wire protocol. One JSON object per message, terminated by '\n',
// carried as the body of an HTTP POST to kLogitsPath (the HTTP Content-Length
// header is the length prefix).
//
//   request:   {"context": [int, ...] | "text", "want": "logits" | "vocab"}
//   logits:    {"vocab_size": V, "logits": [float64 x V]}
//   vocab:     {"vocab_size": V, "tokens": [string x V]}
//   error:     {"error": "message"}
//
// Doubles are printed in shortest round-trip form, so logits survive the
// trip bit-exactly.

#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "dprewrite/lm_provider.h"

namespace dprewrite {

inline constexpr std::string_view kLogitsPath = "/logits";

struct LogitsRequest {
  std::variant<std::vector<TokenId>, std::string> context;
  std::string want = "logits";
};

std::string encode_request(const LogitsRequest& request);
// Throws FormatError.
LogitsRequest decode_request(std::string_view message);

std::string encode_logits_response(const LogitVector& logits);
// Throws FormatError on an error reply, a vocab_size that disagrees with the
// array length, or non-finite entries.
LogitVector decode_logits_response(std::string_view message);

std::string encode_vocab_response(const Vocabulary& vocab);
Vocabulary decode_vocab_response(std::string_view message);

std::string encode_error_response(std::string_view message);

struct Response {
  int status = 200;
  std::string body;
};

// Answers one request against `provider`. Malformed requests produce a 400
// with an error body; nothing is thrown.
Response respond(const LogitsProvider& provider, std::string_view message);

// Serves `provider` over HTTP on a background thread.
class LogitsServer {
 public:
  explicit LogitsServer(ProviderHandle provider);
  ~LogitsServer();
  LogitsServer(const LogitsServer&) = delete;
  LogitsServer& operator=(const LogitsServer&) = delete;

  // Binds and starts serving. Port 0 picks a free port. Returns the port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks in the calling thread until stop() is called elsewhere.
  void listen(const std::string& host, int port);
  void stop();

  int port() const { return port_; }
  std::string endpoint() const;

 private:
  struct Impl;

  ProviderHandle provider_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
};

}  // namespace dprewrite

#endif  // DPREWRITE_PROTOCOL_H_
