/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Training-data export from parsed screens (and from DOM harvest records):
//
//   detection_yolo       one <image>.txt per screen, lines "0 cx cy w h"
//                        normalized to [0,1]; a single "interactable" class.
//   icon_caption_jsonl   icon_captions.jsonl with {crop_path, description}
//                        lines plus the crops under crops/. Negative answers
//                        keep the literal "this is not an icon" description.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "omniparse/fusion.hpp"
#include "omniparse/image.hpp"

namespace omniparse {

enum class ExportFormat { detection_yolo, icon_caption_jsonl };

inline ExportFormat export_format_from_string(std::string_view s) {
  if (s == "detection_yolo") return ExportFormat::detection_yolo;
  if (s == "icon_caption_jsonl") return ExportFormat::icon_caption_jsonl;
  throw InvalidArgument("unknown export format '" + std::string(s) + "'");
}

inline constexpr std::string_view kNotAnIcon = "this is not an icon";

struct ExportSummary {
  int files_written = 0;
  int records = 0;
  std::vector<std::string> warnings;
};

/// Maps minor variants ("This is not an icon.") onto the exact sentinel.
inline std::string normalize_caption(const std::string& description) {
  std::string t = trim(description);
  std::string key;
  for (char c : t)
    if (c != '.' && c != '"' && c != '\'') key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (trim(key) == kNotAnIcon) return std::string(kNotAnIcon);
  return t;
}

inline std::string yolo_line(const BBox& b, double width, double height) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "0 %.6f %.6f %.6f %.6f", (b.x + b.w / 2) / width, (b.y + b.h / 2) / height,
                b.w / width, b.h / height);
  return buf;
}

namespace detail {

struct LabeledImage {
  std::string name;  // output stem
  double width = 0, height = 0;
  std::vector<BBox> boxes;
};

inline std::vector<std::filesystem::path> sorted_inputs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DatasetFormatError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (name.ends_with(".parsed.json") || name.ends_with(".jsonl")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline ParsedScreen read_parsed(const std::filesystem::path& file) {
  std::ifstream in(file);
  try {
    return parsed_screen_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DatasetFormatError(file.string() + ": " + e.what());
  } catch (const DatasetFormatError& e) {
    throw DatasetFormatError(file.string() + ": " + e.message());
  }
}

/// Harvest records: {url, screenshot, viewport:{width,height}, boxes:[{x,y,w,h,...}]}.
inline std::vector<LabeledImage> read_harvest(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::vector<LabeledImage> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LabeledImage li;
      li.name = std::filesystem::path(j.at("screenshot").get<std::string>()).stem().string();
      li.width = j.at("viewport").at("width").get<double>();
      li.height = j.at("viewport").at("height").get<double>();
      if (li.width <= 0 || li.height <= 0) throw DatasetFormatError("non-positive viewport");
      for (const auto& b : j.at("boxes")) {
        const BBox box = box_from(b);
        if (!box.valid() || !within(box, li.width, li.height)) throw DatasetFormatError("box outside viewport");
        li.boxes.push_back(box);
      }
      out.push_back(std::move(li));
    } catch (const nlohmann::json::exception& e) {
      throw DatasetFormatError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DatasetFormatError& e) {
      throw DatasetFormatError(file.string() + ":" + std::to_string(lineno) + ": " + e.message());
    }
  }
  return out;
}

inline std::filesystem::path find_image(const std::filesystem::path& dir, const std::string& image_id) {
  for (const char* ext : {".png", ".jpg", ".jpeg"}) {
    auto p = dir / (image_id + ext);
    if (std::filesystem::is_regular_file(p)) return p;
  }
  return {};
}

}  // namespace detail

/// Exports every `*.parsed.json` (and, for detection_yolo, harvest `*.jsonl`)
/// in `parsed_dir`. Crops for captions are cut from `<images_dir>/<image_id>.png`
/// (or .jpg/.jpeg); `images_dir` defaults to `parsed_dir`.
inline ExportSummary export_dataset(const std::filesystem::path& parsed_dir, ExportFormat format,
                                    const std::filesystem::path& out, std::filesystem::path images_dir = {}) {
  if (images_dir.empty()) images_dir = parsed_dir;
  ExportSummary summary;
  const auto inputs = detail::sorted_inputs(parsed_dir);
  if (inputs.empty()) {
    summary.warnings.push_back("no ParsedScreen or harvest files in " + parsed_dir.string());
    return summary;
  }

  std::vector<detail::LabeledImage> labeled;
  std::vector<ParsedScreen> screens;
  for (const auto& f : inputs) {
    if (f.filename().string().ends_with(".jsonl")) {
      if (format == ExportFormat::icon_caption_jsonl) {
        summary.warnings.push_back("skipping harvest file " + f.string() + " for icon_caption_jsonl");
        continue;
      }
      for (auto& li : detail::read_harvest(f)) labeled.push_back(std::move(li));
    } else {
      auto s = detail::read_parsed(f);
      labeled.push_back({s.image_id, static_cast<double>(s.width), static_cast<double>(s.height), {}});
      for (const auto& e : s.elements) labeled.back().boxes.push_back(e.bbox);
      screens.push_back(std::move(s));
    }
  }

  std::filesystem::create_directories(out);
  if (format == ExportFormat::detection_yolo) {
    for (const auto& li : labeled) {
      std::ofstream f(out / (li.name + ".txt"), std::ios::trunc);
      if (!f) throw Error("cannot write " + (out / (li.name + ".txt")).string());
      for (const auto& b : li.boxes) f << yolo_line(b, li.width, li.height) << "\n";
      ++summary.files_written;
      ++summary.records;
    }
    return summary;
  }

  const auto crops_dir = out / "crops";
  std::filesystem::create_directories(crops_dir);
  std::ofstream jsonl(out / "icon_captions.jsonl", std::ios::trunc);
  ++summary.files_written;
  for (const auto& s : screens) {
    const bool any_icon = std::any_of(s.elements.begin(), s.elements.end(), [](const UIElement& e) {
      return e.kind == ElementKind::icon && e.has_content();
    });
    if (!any_icon) continue;
    const auto img_path = detail::find_image(images_dir, s.image_id);
    if (img_path.empty())
      throw DatasetFormatError("no source image for '" + s.image_id + "' in " + images_dir.string());
    const Image img = load_image(img_path, s.image_id);
    if (img.width() != s.width || img.height() != s.height)
      throw DatasetFormatError("source image " + img_path.string() + " does not match parsed screen size");
    for (const auto& e : s.elements) {
      if (e.kind != ElementKind::icon || !e.has_content()) continue;
      const auto rel = std::filesystem::path("crops") / (s.image_id + "_" + std::to_string(e.id) + ".png");
      const int x0 = static_cast<int>(e.bbox.x), y0 = static_cast<int>(e.bbox.y);
      const int x1 = std::min(img.width(), static_cast<int>(std::ceil(e.bbox.x + e.bbox.w)));
      const int y1 = std::min(img.height(), static_cast<int>(std::ceil(e.bbox.y + e.bbox.h)));
      if (x1 <= x0 || y1 <= y0) continue;
      write_bytes(out / rel, encode_png(img.pixels(cv::Rect(x0, y0, x1 - x0, y1 - y0))));
      ++summary.files_written;
      nlohmann::ordered_json line{{"crop_path", rel.generic_string()}, {"description", normalize_caption(*e.content)}};
      jsonl << line.dump() << "\n";
      ++summary.records;
    }
  }
  return summary;
}

}  // namespace omniparse
