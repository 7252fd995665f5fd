/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// HTTP parse endpoint.
//
//   POST /v1/parse[?image_id=ID]     PNG/JPEG body or multipart field "image"
//                                    -> ParsedScreen JSON, X-Request-Id header
//   GET  /v1/parse/{request}/overlay -> overlay PNG of a recent request
//   GET  /healthz                    -> "ok"
//
// Overlays of recent requests are held in a small in-memory LRU; nothing
// else is kept between requests.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <list>
#include <mutex>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "omniparse/config.hpp"
#include "omniparse/image.hpp"
#include "omniparse/pipeline.hpp"

namespace omniparse {

/// Thread-safe LRU keyed by request id.
class OverlayCache {
 public:
  explicit OverlayCache(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

  void put(const std::string& key, std::vector<std::uint8_t> png) {
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(key); it != index_.end()) order_.erase(it->second);
    order_.emplace_front(key, std::move(png));
    index_[key] = order_.begin();
    while (order_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
  }

  std::optional<std::vector<std::uint8_t>> get(const std::string& key) {
    std::lock_guard lock(mutex_);
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return order_.size();
  }

 private:
  using Entry = std::pair<std::string, std::vector<std::uint8_t>>;
  std::size_t capacity_;
  std::list<Entry> order_;
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
  mutable std::mutex mutex_;
};

class ParseService {
 public:
  ParseService(AppConfig cfg, Adapters adapters, std::ostream& log = std::cerr)
      : cfg_(std::move(cfg)), adapters_(std::move(adapters)), cache_(cfg_.service.overlay_cache), log_(log) {
    std::random_device rd;
    prefix_ = std::to_string(rd() % 100000);
    server_.set_payload_max_length(static_cast<std::size_t>(cfg_.service.max_body_bytes));
    server_.new_task_queue = [this] { return new httplib::ThreadPool(std::max(1, cfg_.llm.concurrency)); };
    routes();
  }

  /// Binds to an ephemeral port when port == 0; returns the bound port or -1.
  int bind(const std::string& host, int port) {
    return port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
  }

  /// Blocks until stop().
  bool listen() { return server_.listen_after_bind(); }

  /// Stops accepting and lets in-flight handlers finish.
  void stop() { server_.stop(); }
  bool running() const { return server_.is_running(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

  OverlayCache& overlays() { return cache_; }

 private:
  std::string next_request_id() { return "req-" + prefix_ + "-" + std::to_string(++counter_); }

  void log(const std::string& id, const httplib::Request& req, int status) {
    std::lock_guard lock(log_mutex_);
    log_ << "[serve] " << id << " " << req.method << " " << req.path << " -> " << status << std::endl;
  }

  void routes() {
    server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok", "text/plain");
    });

    server_.Post("/v1/parse", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = next_request_id();
      res.set_header("X-Request-Id", id);
      handle_parse(req, res, id);
      log(id, req, res.status);
    });

    server_.Get(R"(/v1/parse/([^/]+)/overlay)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (auto png = cache_.get(id)) {
        res.status = 200;
        res.set_content(std::string(png->begin(), png->end()), "image/png");
      } else {
        res.status = 404;
        res.set_content("unknown request id", "text/plain");
      }
      log(id, req, res.status);
    });

    server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.status == 413) res.set_content("request body exceeds the size limit", "text/plain");
    });
  }

  void handle_parse(const httplib::Request& req, httplib::Response& res, const std::string& id) {
    std::string body = req.body;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("image")) {
        res.status = 400;
        res.set_content("multipart body lacks an 'image' field", "text/plain");
        return;
      }
      body = req.get_file_value("image").content;
    }
    const std::string image_id = req.has_param("image_id") ? req.get_param_value("image_id") : "upload";
    try {
      const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size());
      const Image image = decode_image(bytes, image_id);
      const ParsedScreen screen = parse_screen(image, adapters_, cfg_.pipeline());
      cache_.put(id, encode_png(screen.overlay));
      res.status = 200;
      res.set_content(serialize(screen, cfg_.output.timings), "application/json");
    } catch (const ImageDecodeError& e) {
      res.status = 400;
      res.set_content(std::string("undecodable image: ") + e.what(), "text/plain");
    } catch (const ModelUnavailable& e) {
      res.status = 503;
      res.set_content(std::string("adapters unavailable: ") + e.what(), "text/plain");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(std::string("parse failed: ") + e.what(), "text/plain");
    }
  }

  AppConfig cfg_;
  Adapters adapters_;
  OverlayCache cache_;
  httplib::Server server_;
  std::atomic<unsigned long> counter_{0};
  std::string prefix_;
  std::ostream& log_;
  std::mutex log_mutex_;
};

}  // namespace omniparse
