/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <future>
#include <memory>
#include <string>

#include "omniparse/adapters.hpp"
#include "omniparse/fusion.hpp"
#include "omniparse/overlay.hpp"
#include "omniparse/semantics.hpp"

namespace omniparse {

/// The three perception backends. Shared pointers so that one set can serve
/// many concurrent parses.
struct Adapters {
  std::shared_ptr<const Detector> detector;
  std::shared_ptr<const OcrEngine> ocr;
  std::shared_ptr<const Captioner> captioner;
};

struct PipelineConfig {
  DetectorConfig detector;
  double overlap_threshold = kDefaultOverlapThreshold;
  LabelStyle style;
  std::string caption_prompt{kDefaultCaptionPrompt};
  /// Run detection and OCR on separate threads.
  bool concurrent_stages = true;
};

namespace detail {

template <class F>
auto timed_stage(ParsedScreen& screen, const char* stage, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    screen.timings[stage] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto r = f();
      finish();
      return r;
    }
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  }
}

}  // namespace detail

/// Full screen parse: detect -> ocr -> merge -> ids -> captions -> semantics
/// -> label placement -> overlay.
inline ParsedScreen parse_screen(const Image& image, const Adapters& adapters, const PipelineConfig& cfg = {}) {
  if (!adapters.detector || !adapters.ocr || !adapters.captioner)
    throw ModelUnavailable("parse_screen requires detector, ocr and captioner adapters");
  if (image.pixels.empty()) throw ImageDecodeError("empty image '" + image.id + "'");

  ParsedScreen screen;
  screen.image_id = image.id;
  screen.width = image.width();
  screen.height = image.height();

  std::vector<RawDetection> icons;
  std::vector<OcrLine> lines;
  if (cfg.concurrent_stages) {
    auto ocr_future = std::async(std::launch::async, [&] {
      ParsedScreen scratch;
      auto r = detail::timed_stage(scratch, "ocr", [&] { return adapters.ocr->run(image); });
      return std::make_pair(std::move(r), scratch.timings["ocr"]);
    });
    try {
      icons = detail::timed_stage(screen, "detect", [&] { return adapters.detector->detect(image, cfg.detector); });
    } catch (...) {
      ocr_future.wait();
      throw;
    }
    auto [r, ms] = ocr_future.get();
    lines = std::move(r);
    screen.timings["ocr"] = ms;
  } else {
    icons = detail::timed_stage(screen, "detect", [&] { return adapters.detector->detect(image, cfg.detector); });
    lines = detail::timed_stage(screen, "ocr", [&] { return adapters.ocr->run(image); });
  }

  detail::timed_stage(screen, "fuse", [&] {
    screen.elements = assign_ids(merge_boxes(icons, lines, cfg.overlap_threshold));
  });
  detail::timed_stage(screen, "caption",
                      [&] { attach_captions(screen, image, *adapters.captioner, cfg.caption_prompt); });
  detail::timed_stage(screen, "semantics", [&] { build_local_semantics(screen); });
  detail::timed_stage(screen, "overlay", [&] {
    const auto placements = place_labels(screen.elements, screen.width, screen.height, cfg.style);
    screen.overlay = render_overlay(image.pixels, screen.elements, placements, cfg.style);
  });
  return screen;
}

}  // namespace omniparse
