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

// HTTP transport for the logits protocol: RemoteProvider (client) and
// LogitsServer.

#include <mutex>

#include "dprewrite/error.h"
#include "dprewrite/lm_provider.h"
#include "dprewrite/protocol.h"
#include "httplib.h"

namespace dprewrite {

struct RemoteProvider::Impl {
  explicit Impl(const std::string& endpoint) : client(endpoint) {}

  httplib::Client client;
  std::mutex mu;
};

RemoteProvider::RemoteProvider(std::string endpoint, RemoteOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
  if (endpoint_.find("://") == std::string::npos) {
    endpoint_ = "http://" + endpoint_;
  }
  if (options_.max_attempts < 1) options_.max_attempts = 1;
  impl_ = std::make_unique<Impl>(endpoint_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
      options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      options_.timeout - secs);
  impl_->client.set_connection_timeout(secs.count(), usecs.count());
  impl_->client.set_read_timeout(secs.count(), usecs.count());
  impl_->client.set_write_timeout(secs.count(), usecs.count());
  impl_->client.set_keep_alive(true);

  LogitsRequest request;
  request.want = "vocab";
  request.context = std::vector<TokenId>{};
  const std::string body = encode_request(request);
  int attempt = 0;
  for (;;) {
    ++attempt;
    try {
      vocab_ = std::make_unique<Vocabulary>(decode_vocab_response(post(body)));
      return;
    } catch (const std::exception& e) {
      if (attempt >= options_.max_attempts) {
        throw TransportError("vocabulary fetch from " + endpoint_ +
                                 " failed: " + e.what(),
                             attempt);
      }
    }
  }
}

RemoteProvider::~RemoteProvider() = default;

const Vocabulary& RemoteProvider::vocabulary() const { return *vocab_; }

std::string RemoteProvider::post(const std::string& body) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  auto result = impl_->client.Post(std::string(kLogitsPath), body,
                                   "application/json");
  if (!result) {
    throw FormatError("request failed: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw FormatError("HTTP " + std::to_string(result->status) + ": " +
                      result->body);
  }
  return result->body;
}

LogitVector RemoteProvider::next_logits(std::span<const TokenId> context) const {
  LogitsRequest request;
  request.context = std::vector<TokenId>(context.begin(), context.end());
  const std::string body = encode_request(request);
  int attempt = 0;
  for (;;) {
    ++attempt;
    try {
      LogitVector logits = decode_logits_response(post(body));
      if (logits.size() != vocab_->size()) {
        throw FormatError("reply has " + std::to_string(logits.size()) +
                          " logits for a vocabulary of " +
                          std::to_string(vocab_->size()));
      }
      return logits;
    } catch (const std::exception& e) {
      if (attempt >= options_.max_attempts) {
        throw TransportError("logits request to " + endpoint_ + " failed: " +
                                 e.what(),
                             attempt);
      }
    }
  }
}

ProviderHandle make_remote_provider(std::string endpoint,
                                    RemoteOptions options) {
  return std::make_shared<RemoteProvider>(std::move(endpoint), options);
}

struct LogitsServer::Impl {
  httplib::Server server;
};

LogitsServer::LogitsServer(ProviderHandle provider)
    : provider_(std::move(provider)), impl_(std::make_unique<Impl>()) {
  // Idle keep-alive connections would otherwise hold stop() for 5 s.
  impl_->server.set_keep_alive_timeout(1);
  impl_->server.Post(std::string(kLogitsPath),
                     [this](const httplib::Request& req, httplib::Response& res) {
                       const Response reply = respond(*provider_, req.body);
                       res.status = reply.status;
                       res.set_content(reply.body, "application/json");
                     });
}

LogitsServer::~LogitsServer() { stop(); }

int LogitsServer::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) {
    throw TransportError("cannot bind " + host + ":" + std::to_string(port),
                         1);
  }
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void LogitsServer::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!impl_->server.listen(host, port)) {
    throw TransportError("cannot listen on " + host + ":" +
                             std::to_string(port),
                         1);
  }
}

void LogitsServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string LogitsServer::endpoint() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

}  // namespace dprewrite
