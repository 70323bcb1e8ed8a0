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

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "dprewrite/error.h"
#include "dprewrite/lm_provider.h"
#include "dprewrite/prompt.h"
#include "dprewrite/rewriter.h"
#include "dprewrite/tokenizer.h"
#include "httplib.h"
#include "json.hpp"

namespace dprewrite {
namespace {

Vocabulary small_vocab() {
  return Vocabulary::from_tokens({"<s>", "</s>", "<unk>", "a", "b"});
}

TEST(Codec, RequestRoundTrip) {
  LogitsRequest ids;
  ids.context = std::vector<TokenId>{0, 4, 3};
  const LogitsRequest back = decode_request(encode_request(ids));
  EXPECT_EQ(std::get<std::vector<TokenId>>(back.context),
            (std::vector<TokenId>{0, 4, 3}));
  EXPECT_EQ(back.want, "logits");

  LogitsRequest text;
  text.context = std::string("Document: hi");
  EXPECT_EQ(std::get<std::string>(decode_request(encode_request(text)).context),
            "Document: hi");
}

TEST(Codec, RequestIsOneJsonLine) {
  LogitsRequest r;
  r.context = std::vector<TokenId>{1, 2};
  const std::string wire = encode_request(r);
  EXPECT_EQ(wire.find('\n'), wire.size() - 1);
  const auto doc = nlohmann::json::parse(wire);
  EXPECT_EQ(doc["want"], "logits");
  EXPECT_EQ(doc["context"], nlohmann::json::array({1, 2}));
}

TEST(Codec, RejectsMalformedRequests) {
  EXPECT_THROW(decode_request("not json"), FormatError);
  EXPECT_THROW(decode_request("[1,2]"), FormatError);
  EXPECT_THROW(decode_request(R"({"want":"logits"})"), FormatError);
  EXPECT_THROW(decode_request(R"({"context":[-1]})"), FormatError);
  EXPECT_THROW(decode_request(R"({"context":[1.5]})"), FormatError);
  EXPECT_THROW(decode_request(R"({"context":{}})"), FormatError);
  EXPECT_THROW(decode_request(R"({"context":[],"want":"sample"})"), FormatError);
  EXPECT_NO_THROW(decode_request(R"({"want":"vocab"})"));
}

TEST(Codec, LogitsAreBitExact) {
  const LogitVector l{{0.1, -1.0 / 3.0, 1e-308, 123456.789, -19.23}};
  const LogitVector back = decode_logits_response(encode_logits_response(l));
  ASSERT_EQ(back.size(), l.size());
  for (std::size_t i = 0; i < l.size(); ++i) EXPECT_EQ(back[i], l[i]);
}

TEST(Codec, ResponseValidation) {
  EXPECT_THROW(decode_logits_response(R"({"vocab_size":3,"logits":[1,2]})"),
               FormatError);
  EXPECT_THROW(decode_logits_response(R"({"logits":[1,2]})"), FormatError);
  EXPECT_THROW(decode_logits_response(R"({"error":"boom"})"), FormatError);
  EXPECT_THROW(decode_logits_response(R"({"vocab_size":1,"logits":["x"]})"),
               FormatError);
}

TEST(Codec, VocabRoundTrip) {
  const Vocabulary v = small_vocab();
  EXPECT_EQ(decode_vocab_response(encode_vocab_response(v)), v);
  const auto doc = nlohmann::json::parse(encode_vocab_response(v));
  EXPECT_EQ(doc["vocab_size"], 5);
}

TEST(Respond, StatusCodes) {
  const ProviderHandle echo =
      make_echo_provider(small_vocab(), LogitVector{{1, 2, 3, 4, 5}});
  EXPECT_EQ(respond(*echo, R"({"context":[3]})").status, 200);
  EXPECT_EQ(respond(*echo, "garbage").status, 400);
  const Response vocab = respond(*echo, R"({"want":"vocab"})");
  EXPECT_EQ(vocab.status, 200);
  EXPECT_EQ(decode_vocab_response(vocab.body), small_vocab());
  const Response text = respond(*echo, R"({"context":"a b"})");
  EXPECT_EQ(text.status, 200);

  const std::vector<std::string> corpus{"a b"};
  const NgramLm lm = train_ngram(corpus, 2, 0.1);
  EXPECT_EQ(respond(lm, R"({"context":[42]})").status, 400);

  const CallbackProvider failing(small_vocab(), [](std::span<const TokenId>)
                                                    -> LogitVector {
    throw std::runtime_error("model crashed");
  });
  const Response err = respond(failing, R"({"context":[]})");
  EXPECT_EQ(err.status, 500);
  EXPECT_TRUE(nlohmann::json::parse(err.body).contains("error"));
}

TEST(Server, EchoIsBitExactOverTheWire) {
  const LogitVector fixture{{1.0, 2.0, 3.0, -0.1, 1.0 / 7.0}};
  LogitsServer server(make_echo_provider(small_vocab(), fixture));
  server.start();
  const RemoteProvider remote(server.endpoint());
  EXPECT_EQ(remote.vocabulary(), small_vocab());
  const std::vector<TokenId> ctx{3, 4};
  EXPECT_EQ(remote.next_logits(ctx).values, fixture.values);
  EXPECT_EQ(remote.kind(), "remote");
  server.stop();
}

TEST(Server, SurvivesMalformedRequests) {
  LogitsServer server(make_echo_provider(small_vocab(), LogitVector{{1, 2, 3, 4, 5}}));
  server.start();
  httplib::Client raw(server.endpoint());
  const auto bad = raw.Post("/logits", "{{{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  const RemoteProvider remote(server.endpoint());
  EXPECT_EQ(remote.next_logits({}).size(), 5u);
}

TEST(Server, RemoteMatchesLocalNgram) {
  const std::vector<std::string> corpus{"the cat sat", "the dog ran", "a cat ran"};
  auto lm = std::make_shared<NgramLm>(train_ngram(corpus, 3, 0.1));
  LogitsServer server(lm);
  server.start();
  const RemoteProvider remote(server.endpoint());
  for (TokenId a = 0; a < lm->vocabulary().size(); ++a) {
    const std::vector<TokenId> ctx{Vocabulary::kBos, a};
    EXPECT_EQ(remote.next_logits(ctx).values, lm->next_logits(ctx).values);
  }
}

TEST(Server, RemoteSubstitutesForLocalInRewrites) {
  const std::vector<std::string> corpus{"one two three four", "four three two",
                                        "two two one"};
  auto lm = std::make_shared<NgramLm>(
      train_ngram(corpus, 3, 0.1, tokenize(build_prompt(""))));
  const ProviderHandle local = make_local_provider(*lm, 0.5);
  LogitsServer server(local);
  server.start();
  const ProviderHandle remote = make_remote_provider(server.endpoint());
  GenerationConfig config;
  config.max_new_tokens = 12;
  for (const PrivacyParams& p :
       {PrivacyParams::dp(50, 26.71), PrivacyParams::quasi_dp(25, 26.71, 3),
        PrivacyParams::non_dp(2)}) {
    const RewriteRecord a =
        rewrite("one two three", p, default_clip_bounds(), *local, config, 9);
    const RewriteRecord b =
        rewrite("one two three", p, default_clip_bounds(), *remote, config, 9);
    EXPECT_EQ(a.tokens, b.tokens);
    EXPECT_EQ(a.rewritten, b.rewritten);
  }
}

TEST(Remote, UnreachableEndpointReportsAttempts) {
  // Bind and release a port so nothing is listening on it.
  int port = 0;
  {
    LogitsServer probe(make_echo_provider(small_vocab(), LogitVector{{1, 2, 3, 4, 5}}));
    port = probe.start();
    probe.stop();
  }
  RemoteOptions options;
  options.max_attempts = 2;
  options.timeout = std::chrono::milliseconds(300);
  try {
    RemoteProvider remote("127.0.0.1:" + std::to_string(port), options);
    FAIL() << "expected a transport error";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.attempts(), 2);
  }
}

TEST(Remote, ServerErrorsExhaustRetries) {
  // Nonempty contexts make the callback return a short vector, which the
  // server reports as an error reply.
  auto provider = std::make_shared<CallbackProvider>(
      small_vocab(), [](std::span<const TokenId> ctx) {
        if (!ctx.empty()) return LogitVector{{1, 2, 3}};
        return LogitVector{{1, 2, 3, 4, 5}};
      });
  LogitsServer server(provider);
  server.start();
  RemoteOptions options;
  options.max_attempts = 3;
  const RemoteProvider remote(server.endpoint(), options);
  EXPECT_EQ(remote.next_logits({}).size(), 5u);
  const std::vector<TokenId> ctx{3};
  try {
    remote.next_logits(ctx);
    FAIL() << "expected a transport error";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.attempts(), 3);
  }
}

}  // namespace
}  // namespace dprewrite
