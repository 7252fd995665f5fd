/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Contracts for the three perception models (interactable-region detector,
// OCR engine, icon captioner) plus deterministic fixture-backed adapters.
// Downstream code only sees RawDetection / OcrLine / caption strings.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "omniparse/errors.hpp"
#include "omniparse/geometry.hpp"
#include "omniparse/image.hpp"

namespace omniparse {

enum class Source { icon_detector, ocr };

inline std::string_view to_string(Source s) { return s == Source::icon_detector ? "icon_detector" : "ocr"; }

inline Source source_from_string(std::string_view s) {
  if (s == "icon_detector") return Source::icon_detector;
  if (s == "ocr") return Source::ocr;
  throw InvalidArgument("unknown source '" + std::string(s) + "'");
}

struct RawDetection {
  BBox bbox;
  double confidence = 0;
  Source source = Source::icon_detector;

  friend bool operator==(const RawDetection&, const RawDetection&) = default;
};

struct OcrLine {
  BBox bbox;
  std::string text;
  double confidence = 0;

  friend bool operator==(const OcrLine&, const OcrLine&) = default;
};

/// Inference-time detector settings. The defaults are conventional detector
/// values rather than numbers tuned for any particular checkpoint.
struct DetectorConfig {
  double confidence_threshold = 0.05;
  double nms_iou_threshold = 0.5;
  int max_detections = 200;

  void validate() const {
    if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0))
      throw InvalidArgument("detector confidence_threshold must be in [0,1]");
    if (!(nms_iou_threshold >= 0.0 && nms_iou_threshold <= 1.0))
      throw InvalidArgument("detector nms_iou_threshold must be in [0,1]");
    if (max_detections < 1) throw InvalidArgument("detector max_detections must be >= 1");
  }
};

inline constexpr std::string_view kDefaultCaptionPrompt =
    "Describe the functionality of this UI icon in one sentence.";

struct CaptionRequest {
  const Image* image = nullptr;
  std::vector<BBox> crops;
  std::string prompt{kDefaultCaptionPrompt};
};

// -- detection post-processing ----------------------------------------------

/// Confidence-descending order, ties broken by ascending (y, x) of the box.
inline bool detection_before(const RawDetection& a, const RawDetection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
  return a.bbox.x < b.bbox.x;
}

/// Greedy non-maximum suppression. Output is a subsequence of the sorted input
/// in which no pair has iou above the threshold.
inline std::vector<RawDetection> nms(std::vector<RawDetection> dets, double iou_threshold) {
  std::stable_sort(dets.begin(), dets.end(), detection_before);
  std::vector<RawDetection> kept;
  kept.reserve(dets.size());
  for (const auto& d : dets) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const RawDetection& k) {
      return iou(k.bbox, d.bbox) > iou_threshold;
    });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

/// Clamp to image, threshold, suppress, truncate.
inline std::vector<RawDetection> postprocess_detections(std::vector<RawDetection> raw, int width, int height,
                                                        const DetectorConfig& cfg) {
  std::vector<RawDetection> filtered;
  filtered.reserve(raw.size());
  for (auto d : raw) {
    d.source = Source::icon_detector;
    d.bbox = clamp_to(d.bbox, width, height);
    if (d.bbox.w <= 0 || d.bbox.h <= 0) continue;
    d.confidence = std::clamp(d.confidence, 0.0, 1.0);
    if (d.confidence < cfg.confidence_threshold) continue;
    filtered.push_back(d);
  }
  auto kept = nms(std::move(filtered), cfg.nms_iou_threshold);
  if (kept.size() > static_cast<std::size_t>(cfg.max_detections)) kept.resize(cfg.max_detections);
  return kept;
}

inline std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

// -- adapter interfaces --------------------------------------------------------

/// Interactable-region detector. Implementations override propose(); the
/// public detect() applies the shared post-processing so every backend obeys
/// the same output contract. Implementations must be safe to call from
/// several threads at once.
class Detector {
 public:
  virtual ~Detector() = default;

  std::vector<RawDetection> detect(const Image& image, const DetectorConfig& cfg) const {
    cfg.validate();
    return postprocess_detections(propose(image, cfg), image.width(), image.height(), cfg);
  }

 protected:
  virtual std::vector<RawDetection> propose(const Image& image, const DetectorConfig& cfg) const = 0;
};

class OcrEngine {
 public:
  virtual ~OcrEngine() = default;

  /// Lines in engine order, text trimmed, empty lines dropped.
  std::vector<OcrLine> run(const Image& image) const {
    std::vector<OcrLine> out;
    for (auto line : recognize(image)) {
      line.text = trim(line.text);
      if (line.text.empty()) continue;
      line.bbox = clamp_to(line.bbox, image.width(), image.height());
      if (line.bbox.w <= 0 || line.bbox.h <= 0) continue;
      line.confidence = std::clamp(line.confidence, 0.0, 1.0);
      out.push_back(std::move(line));
    }
    return out;
  }

 protected:
  virtual std::vector<OcrLine> recognize(const Image& image) const = 0;
};

/// Icon captioner. Each crop is described on its own, without the rest of
/// the screenshot.
class Captioner {
 public:
  virtual ~Captioner() = default;

  std::vector<std::string> caption(const CaptionRequest& req) const {
    if (req.image == nullptr) throw InvalidArgument("caption request without image");
    if (req.crops.empty()) throw InvalidArgument("caption request with zero crops");
    for (const auto& c : req.crops) {
      if (!c.valid() || !within(c, req.image->width(), req.image->height()))
        throw CropOutOfBounds("crop outside image '" + req.image->id + "'");
    }
    auto captions = describe(*req.image, req.crops, req.prompt);
    if (captions.size() != req.crops.size())
      throw ModelUnavailable("captioner returned " + std::to_string(captions.size()) + " captions for " +
                             std::to_string(req.crops.size()) + " crops");
    for (auto& c : captions) {
      c = trim(c);
      if (c.empty()) throw ModelUnavailable("captioner returned an empty caption");
    }
    return captions;
  }

 protected:
  virtual std::vector<std::string> describe(const Image& image, const std::vector<BBox>& crops,
                                            const std::string& prompt) const = 0;
};

// -- fixture adapters ----------------------------------------------------------

namespace detail {

inline nlohmann::json load_fixture_json(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw ModelUnavailable(std::string(what) + " fixture not found: " + path.string());
  try {
    auto j = nlohmann::json::parse(in);
    if (!j.is_array()) throw ModelUnavailable(std::string(what) + " fixture must be a JSON array: " + path.string());
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ModelUnavailable(std::string(what) + " fixture malformed: " + path.string() + ": " + e.what());
  }
}

inline BBox box_from(const nlohmann::json& j) {
  return BBox{j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()};
}

}  // namespace detail

/// Replays recorded detections keyed by image id.
/// File format: [{image_id, boxes:[{x,y,w,h,confidence}]}].
class FixtureDetector final : public Detector {
 public:
  FixtureDetector() = default;
  explicit FixtureDetector(std::map<std::string, std::vector<RawDetection>> table) : table_(std::move(table)) {}

  static FixtureDetector from_file(const std::filesystem::path& path) {
    std::map<std::string, std::vector<RawDetection>> table;
    try {
      for (const auto& entry : detail::load_fixture_json(path, "detector")) {
        auto& dets = table[entry.at("image_id").get<std::string>()];
        for (const auto& b : entry.at("boxes"))
          dets.push_back({detail::box_from(b), b.value("confidence", 1.0), Source::icon_detector});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ModelUnavailable("detector fixture malformed: " + path.string() + ": " + e.what());
    }
    return FixtureDetector(std::move(table));
  }

 protected:
  std::vector<RawDetection> propose(const Image& image, const DetectorConfig&) const override {
    auto it = table_.find(image.id);
    return it == table_.end() ? std::vector<RawDetection>{} : it->second;
  }

 private:
  std::map<std::string, std::vector<RawDetection>> table_;
};

/// Replays recorded OCR lines keyed by image id.
/// File format: [{image_id, lines:[{x,y,w,h,text,confidence}]}].
class FixtureOcr final : public OcrEngine {
 public:
  FixtureOcr() = default;
  explicit FixtureOcr(std::map<std::string, std::vector<OcrLine>> table) : table_(std::move(table)) {}

  static FixtureOcr from_file(const std::filesystem::path& path) {
    std::map<std::string, std::vector<OcrLine>> table;
    try {
      for (const auto& entry : detail::load_fixture_json(path, "ocr")) {
        auto& lines = table[entry.at("image_id").get<std::string>()];
        for (const auto& l : entry.at("lines"))
          lines.push_back({detail::box_from(l), l.at("text").get<std::string>(), l.value("confidence", 1.0)});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ModelUnavailable("ocr fixture malformed: " + path.string() + ": " + e.what());
    }
    return FixtureOcr(std::move(table));
  }

 protected:
  std::vector<OcrLine> recognize(const Image& image) const override {
    auto it = table_.find(image.id);
    return it == table_.end() ? std::vector<OcrLine>{} : it->second;
  }

 private:
  std::map<std::string, std::vector<OcrLine>> table_;
};

/// Looks captions up by (image id, exact box). An entry's optional "default"
/// caption answers any box without its own record.
/// File format: [{image_id, default?, captions:[{x,y,w,h,text}]}].
class FixtureCaptioner final : public Captioner {
 public:
  struct Entry {
    std::vector<std::pair<BBox, std::string>> captions;
    std::string fallback;
  };

  FixtureCaptioner() = default;
  explicit FixtureCaptioner(std::map<std::string, Entry> table) : table_(std::move(table)) {}

  static FixtureCaptioner from_file(const std::filesystem::path& path) {
    std::map<std::string, Entry> table;
    try {
      for (const auto& entry : detail::load_fixture_json(path, "captioner")) {
        auto& e = table[entry.at("image_id").get<std::string>()];
        e.fallback = entry.value("default", std::string{});
        for (const auto& c : entry.value("captions", nlohmann::json::array()))
          e.captions.emplace_back(detail::box_from(c), c.at("text").get<std::string>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ModelUnavailable("captioner fixture malformed: " + path.string() + ": " + e.what());
    }
    return FixtureCaptioner(std::move(table));
  }

 protected:
  std::vector<std::string> describe(const Image& image, const std::vector<BBox>& crops,
                                    const std::string&) const override {
    auto it = table_.find(image.id);
    std::vector<std::string> out;
    out.reserve(crops.size());
    for (const auto& crop : crops) {
      const std::string* found = nullptr;
      if (it != table_.end()) {
        for (const auto& [box, text] : it->second.captions)
          if (box == crop) found = &text;
        if (found == nullptr && !it->second.fallback.empty()) found = &it->second.fallback;
      }
      if (found == nullptr) {
        throw ModelUnavailable("captioner fixture has no entry for image '" + image.id + "' box (" +
                               std::to_string(crop.x) + ", " + std::to_string(crop.y) + ", " +
                               std::to_string(crop.w) + ", " + std::to_string(crop.h) + ")");
      }
      out.push_back(*found);
    }
    return out;
  }

 private:
  std::map<std::string, Entry> table_;
};

}  // namespace omniparse
