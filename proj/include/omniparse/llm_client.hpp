/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Multimodal chat-completion transport. The mock replays responses keyed by a
// digest of the prompt text and image pixel content, so offline evaluation is
// reproducible bit for bit.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

#include "omniparse/errors.hpp"
#include "omniparse/image.hpp"

namespace omniparse {

struct ChatRequest {
  std::string system;
  std::string user_text;
  std::vector<cv::Mat> images;
  double temperature = 0.0;
  int max_tokens = 1024;

  void validate() const {
    if (user_text.empty()) throw InvalidArgument("chat request user_text must not be empty");
    if (images.size() > 4) throw InvalidArgument("chat request carries more than 4 images");
    if (temperature < 0) throw InvalidArgument("chat temperature must be >= 0");
    if (max_tokens <= 0) throw InvalidArgument("chat max_tokens must be positive");
  }
};

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  Usage usage;
  double latency_ms = 0;
};

/// Stable key for a request: sha256 over the user text and the pixel digest
/// of every attached image, in order. File paths never enter the key.
inline std::string request_digest(const ChatRequest& req) {
  std::string material = "text:" + std::to_string(req.user_text.size()) + ":" + req.user_text;
  for (const auto& img : req.images) material += "\nimage:" + pixel_digest(img);
  return sha256_hex(material);
}

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

// -- retry policy ----------------------------------------------------------------

struct RetryPolicy {
  std::chrono::milliseconds base{1000};
  double factor = 2.0;
  int max_attempts = 5;

  /// Sleep before attempt `attempt` (1-based, so attempt 2 waits `base`).
  std::chrono::milliseconds backoff(int attempt) const {
    double ms = static_cast<double>(base.count());
    for (int i = 2; i < attempt; ++i) ms *= factor;
    return std::chrono::milliseconds(static_cast<long long>(ms));
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Runs `call`, retrying RateLimited / Timeout / TransportError with
/// exponential backoff. AuthError and everything else pass straight through.
template <class F>
auto with_retries(const RetryPolicy& policy, const Sleeper& sleep, F&& call) -> decltype(call()) {
  for (int attempt = 1;; ++attempt) {
    try {
      return call();
    } catch (const RateLimited&) {
      if (attempt >= policy.max_attempts) throw;
    } catch (const Timeout&) {
      if (attempt >= policy.max_attempts) throw;
    } catch (const TransportError&) {
      if (attempt >= policy.max_attempts) throw;
    }
    sleep(policy.backoff(attempt + 1));
  }
}

// -- mock --------------------------------------------------------------------------

/// Fixture-backed client: a JSON object mapping request digest -> response
/// text. Unknown digests raise MockMiss. Immutable, so shareable.
class MockLlmClient final : public LlmClient {
 public:
  MockLlmClient() = default;
  explicit MockLlmClient(std::map<std::string, std::string> table) : table_(std::move(table)) {}

  static MockLlmClient from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("mock llm fixture not found: " + path.string());
    try {
      return MockLlmClient(nlohmann::json::parse(in).get<std::map<std::string, std::string>>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("mock llm fixture malformed: " + path.string() + ": " + e.what());
    }
  }

  ChatResponse complete(const ChatRequest& req) override {
    req.validate();
    const auto key = request_digest(req);
    auto it = table_.find(key);
    if (it == table_.end()) throw MockMiss("no mock response for digest " + key);
    return ChatResponse{it->second, {}, 0.0};
  }

  const std::map<std::string, std::string>& table() const { return table_; }

 private:
  std::map<std::string, std::string> table_;
};

/// Adapts a callable; handy for scripted agents in tests and for recording
/// mock fixtures.
class FunctionLlmClient final : public LlmClient {
 public:
  explicit FunctionLlmClient(std::function<std::string(const ChatRequest&)> fn) : fn_(std::move(fn)) {}

  ChatResponse complete(const ChatRequest& req) override {
    req.validate();
    return ChatResponse{fn_(req), {}, 0.0};
  }

 private:
  std::function<std::string(const ChatRequest&)> fn_;
};

// -- decorators -----------------------------------------------------------------------

/// Caps the number of in-flight requests against the wrapped client.
class ConcurrencyLimitedClient final : public LlmClient {
 public:
  ConcurrencyLimitedClient(std::shared_ptr<LlmClient> inner, int max_in_flight)
      : inner_(std::move(inner)), slots_(std::max(1, max_in_flight)) {}

  ChatResponse complete(const ChatRequest& req) override {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    return inner_->complete(req);
  }

 private:
  std::shared_ptr<LlmClient> inner_;
  std::counting_semaphore<> slots_;
};

/// Appends one JSON line per request/response (or error) for audit.
class TranscriptClient final : public LlmClient {
 public:
  TranscriptClient(std::shared_ptr<LlmClient> inner, const std::filesystem::path& path)
      : inner_(std::move(inner)), out_(path, std::ios::app) {
    if (!out_) throw ConfigError("cannot open llm transcript " + path.string());
  }

  ChatResponse complete(const ChatRequest& req) override {
    nlohmann::ordered_json line;
    line["digest"] = request_digest(req);
    line["user_text"] = req.user_text;
    auto images = nlohmann::ordered_json::array();
    for (const auto& img : req.images) images.push_back(pixel_digest(img));
    line["images"] = images;
    try {
      auto resp = inner_->complete(req);
      line["response"] = resp.text;
      line["latency_ms"] = resp.latency_ms;
      write(line);
      return resp;
    } catch (const std::exception& e) {
      line["error"] = e.what();
      write(line);
      throw;
    }
  }

 private:
  void write(const nlohmann::ordered_json& line) {
    std::lock_guard lock(mutex_);
    out_ << line.dump() << '\n';
    out_.flush();
  }

  std::shared_ptr<LlmClient> inner_;
  std::ofstream out_;
  std::mutex mutex_;
};

}  // namespace omniparse
