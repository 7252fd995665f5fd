/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Live network backends: an OpenAI-compatible chat-completions client and an
// HTTP icon captioner.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <string>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

#include "omniparse/adapters.hpp"
#include "omniparse/llm_client.hpp"

namespace omniparse {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // /v1/...

  static Endpoint parse(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
  }
};

struct LiveLlmSettings {
  std::string endpoint;  // full chat-completions URL
  std::string api_key;
  std::string model;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;

  /// Fills unset fields from LLM_ENDPOINT, LLM_API_KEY, LLM_MODEL.
  void apply_env() {
    auto env = [](const char* name) -> std::string {
      const char* v = std::getenv(name);
      return v ? v : "";
    };
    if (endpoint.empty()) endpoint = env("LLM_ENDPOINT");
    if (api_key.empty()) api_key = env("LLM_API_KEY");
    if (model.empty()) model = env("LLM_MODEL");
  }
};

class HttpLlmClient final : public LlmClient {
 public:
  explicit HttpLlmClient(LiveLlmSettings settings, Sleeper sleeper = real_sleep)
      : settings_(std::move(settings)), sleeper_(std::move(sleeper)) {
    if (settings_.endpoint.empty()) throw ConfigError("live llm requires an endpoint (LLM_ENDPOINT)");
    endpoint_ = Endpoint::parse(settings_.endpoint);
  }

  ChatResponse complete(const ChatRequest& req) override {
    req.validate();
    const std::string body = request_body(req).dump();
    return with_retries(settings_.retry, sleeper_, [&] { return attempt(body); });
  }

  nlohmann::json request_body(const ChatRequest& req) const {
    nlohmann::json messages = nlohmann::json::array();
    if (!req.system.empty()) messages.push_back({{"role", "system"}, {"content", req.system}});
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", req.user_text}});
    for (const auto& img : req.images) {
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + base64_encode(encode_png(img))}}}});
    }
    messages.push_back({{"role", "user"}, {"content", content}});
    nlohmann::json body{{"messages", messages}, {"temperature", req.temperature}, {"max_tokens", req.max_tokens}};
    if (!settings_.model.empty()) body["model"] = settings_.model;
    return body;
  }

 private:
  ChatResponse attempt(const std::string& body) const {
    httplib::Client cli(endpoint_.base);
    const auto secs = static_cast<time_t>(settings_.timeout.count());
    cli.set_connection_timeout(secs, 0);
    cli.set_read_timeout(secs, 0);
    cli.set_write_timeout(secs, 0);
    httplib::Headers headers;
    if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);

    const auto start = std::chrono::steady_clock::now();
    auto res = cli.Post(endpoint_.path, headers, body, "application/json");
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!res) {
      if (res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
          res.error() == httplib::Error::ConnectionTimeout)
        throw Timeout("llm request timed out: " + httplib::to_string(res.error()));
      throw TransportError("llm request failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) throw AuthError("llm endpoint rejected credentials (" + std::to_string(res->status) + ")");
    if (res->status == 429) throw RateLimited("llm endpoint rate limited the request");
    if (res->status == 408 || res->status == 504) throw Timeout("llm endpoint timed out (" + std::to_string(res->status) + ")");
    if (res->status >= 500) throw TransportError("llm endpoint error " + std::to_string(res->status));
    if (res->status != 200) throw Error("llm endpoint returned " + std::to_string(res->status) + ": " + res->body);

    try {
      const auto j = nlohmann::json::parse(res->body);
      ChatResponse out;
      const auto& msg = j.at("choices").at(0).at("message").at("content");
      out.text = msg.is_null() ? "" : msg.get<std::string>();
      if (j.contains("usage")) {
        out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
        out.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
      }
      out.latency_ms = ms;
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed llm response: ") + e.what());
    }
  }

  LiveLlmSettings settings_;
  Sleeper sleeper_;
  Endpoint endpoint_;
};

/// Captioner service client. Each crop is posted on its own as
/// {"prompt", "image_base64"}; the reply must be {"caption": "..."}.
class HttpCaptioner final : public Captioner {
 public:
  explicit HttpCaptioner(const std::string& url) : endpoint_(Endpoint::parse(url)) {}

 protected:
  std::vector<std::string> describe(const Image& image, const std::vector<BBox>& crops,
                                    const std::string& prompt) const override {
    std::vector<std::string> out;
    out.reserve(crops.size());
    httplib::Client cli(endpoint_.base);
    cli.set_read_timeout(60, 0);
    for (const auto& c : crops) {
      const auto s = cv::Rect(static_cast<int>(c.x), static_cast<int>(c.y), std::max(1, static_cast<int>(c.w)),
                              std::max(1, static_cast<int>(c.h))) &
                     cv::Rect(0, 0, image.width(), image.height());
      const nlohmann::json body{{"prompt", prompt}, {"image_base64", base64_encode(encode_png(image.pixels(s)))}};
      auto res = cli.Post(endpoint_.path, body.dump(), "application/json");
      if (!res) throw ModelUnavailable("captioner unreachable: " + httplib::to_string(res.error()));
      if (res->status != 200) throw ModelUnavailable("captioner returned " + std::to_string(res->status));
      try {
        out.push_back(nlohmann::json::parse(res->body).at("caption").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw ModelUnavailable(std::string("malformed captioner reply: ") + e.what());
      }
    }
    return out;
  }

 private:
  Endpoint endpoint_;
};

}  // namespace omniparse
