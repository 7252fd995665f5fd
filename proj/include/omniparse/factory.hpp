/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <memory>
#include <string>

#include "omniparse/adapters.hpp"
#include "omniparse/command_ocr.hpp"
#include "omniparse/config.hpp"
#include "omniparse/http_backends.hpp"
#include "omniparse/llm_client.hpp"
#include "omniparse/onnx_detector.hpp"
#include "omniparse/pipeline.hpp"

namespace omniparse {

namespace detail {

// Stand-ins for backends that are not configured; they fail only when used.
class UnavailableDetector final : public Detector {
 protected:
  std::vector<RawDetection> propose(const Image&, const DetectorConfig&) const override {
    throw ModelUnavailable("no detector configured (detector.fixture or detector.model_path)");
  }
};

class UnavailableOcr final : public OcrEngine {
 protected:
  std::vector<OcrLine> recognize(const Image&) const override {
    throw ModelUnavailable("no ocr engine configured (ocr.fixture or ocr.engine_cmd)");
  }
};

class UnavailableCaptioner final : public Captioner {
 protected:
  std::vector<std::string> describe(const Image&, const std::vector<BBox>&, const std::string&) const override {
    throw ModelUnavailable("no captioner configured (captioner.fixture or captioner.endpoint)");
  }
};

}  // namespace detail

/// Fixtures win over live backends when both are configured.
inline Adapters make_adapters(const AppConfig& cfg) {
  Adapters a;
  if (!cfg.detector.fixture.empty()) {
    a.detector = std::make_shared<FixtureDetector>(FixtureDetector::from_file(cfg.detector.fixture));
  } else if (!cfg.detector.model_path.empty()) {
    a.detector = std::make_shared<OnnxDetector>(cfg.detector.model_path, cfg.detector.input_size);
  } else {
    a.detector = std::make_shared<detail::UnavailableDetector>();
  }

  if (!cfg.ocr.fixture.empty()) {
    a.ocr = std::make_shared<FixtureOcr>(FixtureOcr::from_file(cfg.ocr.fixture));
  } else if (!cfg.ocr.engine_cmd.empty()) {
    a.ocr = std::make_shared<CommandOcr>(cfg.ocr.engine_cmd);
  } else {
    a.ocr = std::make_shared<detail::UnavailableOcr>();
  }

  if (!cfg.captioner.fixture.empty()) {
    a.captioner = std::make_shared<FixtureCaptioner>(FixtureCaptioner::from_file(cfg.captioner.fixture));
  } else if (!cfg.captioner.endpoint.empty()) {
    a.captioner = std::make_shared<HttpCaptioner>(cfg.captioner.endpoint);
  } else {
    a.captioner = std::make_shared<detail::UnavailableCaptioner>();
  }
  return a;
}

/// Builds the llm client stack: backend, optional audit transcript,
/// concurrency cap.
inline std::shared_ptr<LlmClient> make_llm(const AppConfig& cfg, const std::string& mode) {
  std::shared_ptr<LlmClient> client;
  if (mode == "mock") {
    if (cfg.llm.mock_fixture.empty()) throw ConfigError("llm mode mock requires llm.mock_fixture");
    client = std::make_shared<MockLlmClient>(MockLlmClient::from_file(cfg.llm.mock_fixture));
  } else if (mode == "live") {
    LiveLlmSettings s{cfg.llm.endpoint, cfg.llm.api_key, cfg.llm.model, std::chrono::seconds(cfg.llm.timeout_s), {}};
    s.apply_env();
    client = std::make_shared<HttpLlmClient>(std::move(s));
  } else {
    throw ConfigError("unknown llm mode '" + mode + "'");
  }
  if (!cfg.llm.transcript.empty()) client = std::make_shared<TranscriptClient>(client, cfg.llm.transcript);
  return std::make_shared<ConcurrencyLimitedClient>(client, cfg.llm.concurrency);
}

}  // namespace omniparse
