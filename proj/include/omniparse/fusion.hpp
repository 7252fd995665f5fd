/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

#include "omniparse/adapters.hpp"
#include "omniparse/geometry.hpp"

namespace omniparse {

enum class ElementKind { icon, text };

inline std::string_view to_string(ElementKind k) { return k == ElementKind::icon ? "icon" : "text"; }

inline ElementKind kind_from_string(std::string_view s) {
  if (s == "icon") return ElementKind::icon;
  if (s == "text") return ElementKind::text;
  throw InvalidArgument("unknown element kind '" + std::string(s) + "'");
}

inline constexpr int kUnassignedId = -1;
inline constexpr double kDefaultOverlapThreshold = 0.9;

struct UIElement {
  int id = kUnassignedId;
  BBox bbox;
  ElementKind kind = ElementKind::icon;
  /// OCR text for text elements; merged OCR text or caption for icons.
  std::optional<std::string> content;
  Source source = Source::icon_detector;
  double confidence = 0;

  bool has_content() const { return content.has_value() && !content->empty(); }

  friend bool operator==(const UIElement&, const UIElement&) = default;
};

struct ParsedScreen {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<UIElement> elements;
  cv::Mat overlay;
  std::string semantics_block;
  std::map<std::string, double> timings;
};

/// Merges icon detections with OCR lines.
///
/// Every icon survives. An OCR line whose overlap_ratio with some icon
/// exceeds `threshold` is absorbed into the best such icon (largest ratio,
/// then higher icon confidence, then smaller (y, x)); absorbed text is joined
/// in reading order. Remaining lines are deduplicated among themselves with
/// the same rule, keeping the more confident line. Output holds the icons in
/// input order followed by the surviving lines in engine order, all with
/// unassigned ids.
inline std::vector<UIElement> merge_boxes(const std::vector<RawDetection>& icons, const std::vector<OcrLine>& texts,
                                          double threshold = kDefaultOverlapThreshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InvalidArgument("overlap threshold must be in (0,1]");

  std::vector<std::vector<std::size_t>> absorbed(icons.size());
  std::vector<std::size_t> loose;
  for (std::size_t t = 0; t < texts.size(); ++t) {
    std::optional<std::size_t> best;
    double best_ratio = 0;
    for (std::size_t i = 0; i < icons.size(); ++i) {
      const double r = overlap_ratio(texts[t].bbox, icons[i].bbox);
      if (r <= threshold) continue;
      bool better = !best.has_value() || r > best_ratio;
      if (best && r == best_ratio) {
        const auto& a = icons[i];
        const auto& b = icons[*best];
        better = a.confidence > b.confidence ||
                 (a.confidence == b.confidence && std::tie(a.bbox.y, a.bbox.x) < std::tie(b.bbox.y, b.bbox.x));
      }
      if (better) {
        best = i;
        best_ratio = r;
      }
    }
    if (best) {
      absorbed[*best].push_back(t);
    } else {
      loose.push_back(t);
    }
  }

  // Text-vs-text duplicates: greedy by confidence, engine order on ties.
  std::vector<std::size_t> by_conf = loose;
  std::stable_sort(by_conf.begin(), by_conf.end(),
                   [&](std::size_t a, std::size_t b) { return texts[a].confidence > texts[b].confidence; });
  std::vector<std::size_t> kept_text;
  for (auto t : by_conf) {
    const bool dup = std::any_of(kept_text.begin(), kept_text.end(), [&](std::size_t k) {
      return overlap_ratio(texts[t].bbox, texts[k].bbox) > threshold;
    });
    if (!dup) kept_text.push_back(t);
  }
  std::sort(kept_text.begin(), kept_text.end());

  std::vector<UIElement> out;
  out.reserve(icons.size() + kept_text.size());
  for (std::size_t i = 0; i < icons.size(); ++i) {
    UIElement e{kUnassignedId, icons[i].bbox, ElementKind::icon, std::nullopt, Source::icon_detector,
                icons[i].confidence};
    auto& idx = absorbed[i];
    if (!idx.empty()) {
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(texts[a].bbox.y, texts[a].bbox.x) < std::tie(texts[b].bbox.y, texts[b].bbox.x);
      });
      std::string joined;
      for (auto t : idx) {
        if (!joined.empty()) joined += ' ';
        joined += texts[t].text;
      }
      e.content = std::move(joined);
    }
    out.push_back(std::move(e));
  }
  for (auto t : kept_text)
    out.push_back({kUnassignedId, texts[t].bbox, ElementKind::text, texts[t].text, Source::ocr, texts[t].confidence});
  return out;
}

/// Sorts into raster order (y, x, w, h, kind) and numbers the elements 0..N-1.
inline std::vector<UIElement> assign_ids(std::vector<UIElement> elements) {
  std::stable_sort(elements.begin(), elements.end(), [](const UIElement& a, const UIElement& b) {
    return std::tie(a.bbox.y, a.bbox.x, a.bbox.w, a.bbox.h, a.kind) <
           std::tie(b.bbox.y, b.bbox.x, b.bbox.w, b.bbox.h, b.kind);
  });
  for (std::size_t i = 0; i < elements.size(); ++i) elements[i].id = static_cast<int>(i);
  return elements;
}

// -- ParsedScreen JSON (schema v1) ---------------------------------------------

inline constexpr std::string_view kParsedScreenSchema = "v1";

inline nlohmann::ordered_json box_to_json(const BBox& b) {
  return nlohmann::ordered_json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

/// `with_timings = false` writes an empty timings object so that output is
/// byte-stable across runs.
inline nlohmann::ordered_json to_json(const ParsedScreen& s, bool with_timings = true) {
  nlohmann::ordered_json j;
  j["schema_version"] = kParsedScreenSchema;
  j["image_id"] = s.image_id;
  j["width"] = s.width;
  j["height"] = s.height;
  auto elements = nlohmann::ordered_json::array();
  for (const auto& e : s.elements) {
    nlohmann::ordered_json je;
    je["id"] = e.id;
    je["kind"] = to_string(e.kind);
    je["box"] = box_to_json(e.bbox);
    je["content"] = e.content ? nlohmann::ordered_json(*e.content) : nlohmann::ordered_json(nullptr);
    je["source"] = to_string(e.source);
    je["confidence"] = e.confidence;
    elements.push_back(std::move(je));
  }
  j["elements"] = std::move(elements);
  j["semantics"] = s.semantics_block;
  j["timings"] = nlohmann::ordered_json::object();
  if (with_timings)
    for (const auto& [stage, ms] : s.timings) j["timings"][stage] = ms;
  return j;
}

inline std::string serialize(const ParsedScreen& s, bool with_timings = true) {
  return to_json(s, with_timings).dump(2) + "\n";
}

/// Parses and validates a v1 document. Throws DatasetFormatError.
inline ParsedScreen parsed_screen_from_json(const nlohmann::json& j) {
  ParsedScreen s;
  try {
    if (j.at("schema_version").get<std::string>() != kParsedScreenSchema)
      throw DatasetFormatError("unsupported ParsedScreen schema_version");
    s.image_id = j.at("image_id").get<std::string>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.semantics_block = j.value("semantics", std::string{});
    for (const auto& je : j.at("elements")) {
      UIElement e;
      e.id = je.at("id").get<int>();
      e.kind = kind_from_string(je.at("kind").get<std::string>());
      e.bbox = detail::box_from(je.at("box"));
      if (!je.at("content").is_null()) e.content = je.at("content").get<std::string>();
      e.source = source_from_string(je.at("source").get<std::string>());
      e.confidence = je.at("confidence").get<double>();
      s.elements.push_back(std::move(e));
    }
    if (j.contains("timings"))
      for (const auto& [k, v] : j.at("timings").items()) s.timings[k] = v.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DatasetFormatError(std::string("malformed ParsedScreen: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DatasetFormatError("malformed ParsedScreen: " + e.message());
  }
  if (s.width <= 0 || s.height <= 0) throw DatasetFormatError("ParsedScreen has non-positive dimensions");
  for (std::size_t i = 0; i < s.elements.size(); ++i) {
    const auto& e = s.elements[i];
    if (e.id != static_cast<int>(i)) throw DatasetFormatError("ParsedScreen element ids are not 0..N-1 in order");
    if (!e.bbox.valid() || !within(e.bbox, s.width, s.height))
      throw DatasetFormatError("ParsedScreen element " + std::to_string(i) + " box outside the screen");
    if (e.kind == ElementKind::text && !e.has_content())
      throw DatasetFormatError("ParsedScreen text element " + std::to_string(i) + " has no content");
  }
  return s;
}

}  // namespace omniparse
