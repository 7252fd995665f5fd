/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Set-of-Mark overlay: numeric label placement and rendering.
//
// Each element gets a label holding its id. Labels are placed greedily in
// id order. For every element eight anchors are tried, in this order:
//
//   0 above, left-aligned      4 inside top-left
//   1 above, right-aligned     5 inside top-right
//   2 below, left-aligned      6 inside bottom-left
//   3 below, right-aligned     7 inside bottom-right
//
// A candidate scores the area it shares with every element box, plus the
// area shared with labels already placed, plus the area hanging outside the
// image. The lowest score wins; ties go to the lower index. The winner is
// then shifted (and if necessary shrunk) to lie inside the image.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "omniparse/fusion.hpp"
#include "omniparse/geometry.hpp"

namespace omniparse {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct LabelStyle {
  int font_size = 16;
  int label_pad = 2;
  int box_stroke = 2;
  std::vector<Rgb> palette{{230, 25, 75},  {60, 180, 75},  {0, 130, 200}, {245, 130, 48},  {145, 30, 180},
                           {70, 240, 240}, {240, 50, 230}, {128, 128, 0}, {0, 128, 128},   {170, 110, 40}};

  void validate() const {
    if (font_size <= 0 || label_pad <= 0 || box_stroke <= 0)
      throw InvalidArgument("overlay style dimensions must be positive");
    if (palette.empty()) throw InvalidArgument("overlay palette must not be empty");
  }

  const Rgb& color_for(int id) const { return palette[static_cast<std::size_t>(id) % palette.size()]; }

  friend bool operator==(const LabelStyle&, const LabelStyle&) = default;
};

struct Placement {
  int element_id = 0;
  BBox label_box;
  int candidate_index = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Unconstrained rectangle; may extend past the image edge.
struct Rect {
  double x = 0, y = 0, w = 0, h = 0;
};

// -- bundled digit font --------------------------------------------------------

namespace font {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kUnitsPerScale = 8;

// One byte per row, low 5 bits, MSB of the 5 is the left column.
inline constexpr std::array<std::array<std::uint8_t, kGlyphHeight>, 10> kDigits{{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
}};

inline int scale_for(int font_size) { return std::max(1, font_size / kUnitsPerScale); }

inline const std::array<std::uint8_t, kGlyphHeight>& glyph(char c) {
  if (c < '0' || c > '9') throw RenderError(std::string("no glyph for character '") + c + "'");
  return kDigits[static_cast<std::size_t>(c - '0')];
}

}  // namespace font

/// Pixel size of the label box for an id: rendered digit string plus padding.
inline Rect label_extent(int id, const LabelStyle& style) {
  const auto digits = std::to_string(id);
  const int s = font::scale_for(style.font_size);
  const int n = static_cast<int>(digits.size());
  const double text_w = n * font::kGlyphWidth * s + (n - 1) * s;
  const double text_h = font::kGlyphHeight * s;
  return Rect{0, 0, text_w + 2.0 * style.label_pad, text_h + 2.0 * style.label_pad};
}

inline std::array<Rect, 8> label_candidates(const BBox& b, double lw, double lh) {
  const double left = b.x;
  const double right = b.x + b.w - lw;
  const double above = b.y - lh;
  const double below = b.y + b.h;
  const double top = b.y;
  const double bottom = b.y + b.h - lh;
  return {{{left, above, lw, lh},
           {right, above, lw, lh},
           {left, below, lw, lh},
           {right, below, lw, lh},
           {left, top, lw, lh},
           {right, top, lw, lh},
           {left, bottom, lw, lh},
           {right, bottom, lw, lh}}};
}

inline double out_of_bounds_area(const Rect& r, double width, double height) {
  return area(r) - intersection_area(r, Rect{0, 0, width, height});
}

inline BBox clamp_label(const Rect& r, double width, double height) {
  const double w = std::min(r.w, width);
  const double h = std::min(r.h, height);
  return BBox{std::clamp(r.x, 0.0, width - w), std::clamp(r.y, 0.0, height - h), w, h};
}

/// Greedy label placement; see the header comment for the candidate order
/// and scoring rule. Returns one placement per element in ascending id order.
inline std::vector<Placement> place_labels(const std::vector<UIElement>& elements, int width, int height,
                                           const LabelStyle& style = {}) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  style.validate();

  std::vector<const UIElement*> order;
  order.reserve(elements.size());
  for (const auto& e : elements) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const UIElement* a, const UIElement* b) { return a->id < b->id; });

  std::vector<Placement> placed;
  placed.reserve(elements.size());
  for (const UIElement* e : order) {
    const Rect ext = label_extent(e->id, style);
    const auto candidates = label_candidates(e->bbox, ext.w, ext.h);
    int best = 0;
    double best_score = 0;
    for (int c = 0; c < 8; ++c) {
      const Rect& r = candidates[c];
      double score = out_of_bounds_area(r, width, height);
      for (const auto& other : elements) score += intersection_area(r, other.bbox);
      for (const auto& p : placed) score += intersection_area(r, p.label_box);
      if (c == 0 || score < best_score) {
        best = c;
        best_score = score;
      }
    }
    placed.push_back({e->id, clamp_label(candidates[best], width, height), best});
  }
  return placed;
}

namespace detail {

struct PixelSpan {
  int x0, y0, x1, y1;  // half-open
};

inline PixelSpan pixel_span(const BBox& b, int width, int height) {
  return {std::clamp(static_cast<int>(std::floor(b.x)), 0, width),
          std::clamp(static_cast<int>(std::floor(b.y)), 0, height),
          std::clamp(static_cast<int>(std::ceil(b.x + b.w)), 0, width),
          std::clamp(static_cast<int>(std::ceil(b.y + b.h)), 0, height)};
}

}  // namespace detail

/// Draws element boxes and their id labels onto a copy of the image. Boxes
/// are stroked inward from their pixel-rounded outline; labels are drawn last.
inline cv::Mat render_overlay(const cv::Mat& image, const std::vector<UIElement>& elements,
                              const std::vector<Placement>& placements, const LabelStyle& style = {}) {
  if (image.type() != CV_8UC3) throw RenderError("overlay expects an 8-bit BGR image");
  if (placements.size() != elements.size()) throw InvalidArgument("placements do not match elements");
  style.validate();

  cv::Mat out = image.clone();
  const int W = out.cols;
  const int H = out.rows;
  auto bgr = [](const Rgb& c) { return cv::Vec3b(c.b, c.g, c.r); };

  for (const auto& e : elements) {
    const auto s = detail::pixel_span(e.bbox, W, H);
    const cv::Vec3b color = bgr(style.color_for(e.id));
    const int k = style.box_stroke;
    for (int y = s.y0; y < s.y1; ++y) {
      auto* row = out.ptr<cv::Vec3b>(y);
      const bool edge_row = y < s.y0 + k || y >= s.y1 - k;
      for (int x = s.x0; x < s.x1; ++x)
        if (edge_row || x < s.x0 + k || x >= s.x1 - k) row[x] = color;
    }
  }

  const int scale = font::scale_for(style.font_size);
  for (const auto& p : placements) {
    const auto s = detail::pixel_span(p.label_box, W, H);
    const Rgb& c = style.color_for(p.element_id);
    const cv::Vec3b fill = bgr(c);
    const int luma = (299 * c.r + 587 * c.g + 114 * c.b) / 1000;
    const cv::Vec3b ink = luma < 140 ? cv::Vec3b(255, 255, 255) : cv::Vec3b(0, 0, 0);
    for (int y = s.y0; y < s.y1; ++y) {
      auto* row = out.ptr<cv::Vec3b>(y);
      for (int x = s.x0; x < s.x1; ++x) row[x] = fill;
    }
    const auto digits = std::to_string(p.element_id);
    int pen_x = s.x0 + style.label_pad;
    const int pen_y = s.y0 + style.label_pad;
    for (char ch : digits) {
      const auto& g = font::glyph(ch);
      for (int gy = 0; gy < font::kGlyphHeight; ++gy) {
        for (int gx = 0; gx < font::kGlyphWidth; ++gx) {
          if (!(g[gy] & (0x10 >> gx))) continue;
          for (int dy = 0; dy < scale; ++dy) {
            const int y = pen_y + gy * scale + dy;
            if (y < s.y0 || y >= s.y1) continue;
            auto* row = out.ptr<cv::Vec3b>(y);
            for (int dx = 0; dx < scale; ++dx) {
              const int x = pen_x + gx * scale + dx;
              if (x >= s.x0 && x < s.x1) row[x] = ink;
            }
          }
        }
      }
      pen_x += (font::kGlyphWidth + 1) * scale;
    }
  }
  return out;
}

}  // namespace omniparse
