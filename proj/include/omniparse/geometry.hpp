/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <string>

#include "omniparse/errors.hpp"

namespace omniparse {

/// Pixel-space point, origin top-left, y grows downward.
struct Point {
  double x = 0;
  double y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned pixel rectangle given by its top-left corner and extent.
///
/// A valid box has finite, non-negative origin and strictly positive size.
/// The struct itself does not enforce this; use make() at input boundaries.
struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  static BBox make(double x, double y, double w, double h) {
    BBox b{x, y, w, h};
    if (!b.valid()) {
      throw InvalidArgument("invalid box (" + std::to_string(x) + ", " + std::to_string(y) + ", " +
                            std::to_string(w) + ", " + std::to_string(h) + ")");
    }
    return b;
  }

  bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && x >= 0 &&
           y >= 0 && w > 0 && h > 0;
  }

  double right() const { return x + w; }
  double bottom() const { return y + h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Anything with public x/y/w/h members. Label candidates use this to carry
/// rectangles that may hang off the image edge.
template <class R>
concept RectLike = requires(const R& r) {
  { r.x } -> std::convertible_to<double>;
  { r.y } -> std::convertible_to<double>;
  { r.w } -> std::convertible_to<double>;
  { r.h } -> std::convertible_to<double>;
};

template <RectLike R>
constexpr double area(const R& b) {
  return b.w * b.h;
}

template <RectLike A, RectLike B>
constexpr double intersection_area(const A& a, const B& b) {
  // min/max are symmetric so the result is bit-identical under swap.
  const double left = std::max<double>(a.x, b.x);
  const double top = std::max<double>(a.y, b.y);
  const double right = std::min<double>(a.x + a.w, b.x + b.w);
  const double bottom = std::min<double>(a.y + a.h, b.y + b.h);
  if (right <= left || bottom <= top) return 0.0;
  return (right - left) * (bottom - top);
}

/// Intersection over the smaller of the two areas. 1.0 under containment.
template <RectLike A, RectLike B>
constexpr double overlap_ratio(const A& a, const B& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  // Exact under containment even when edges do not round-trip.
  auto inside = [](const auto& p, const auto& q) {
    return p.x >= q.x && p.y >= q.y && p.x + p.w <= q.x + q.w && p.y + p.h <= q.y + q.h;
  };
  if (inside(a, b) || inside(b, a)) return 1.0;
  const double smaller = std::min(area(a), area(b));
  return std::min(1.0, inter / smaller);
}

template <RectLike A, RectLike B>
constexpr double iou(const A& a, const B& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = area(a) + area(b) - inter;
  return std::min(1.0, inter / uni);
}

template <RectLike R>
constexpr Point center(const R& b) {
  return Point{b.x + b.w / 2.0, b.y + b.h / 2.0};
}

/// Closed-rectangle membership: edges count as inside.
template <RectLike R>
constexpr bool contains_point(const R& b, const Point& p) {
  return b.x <= p.x && p.x <= b.x + b.w && b.y <= p.y && p.y <= b.y + b.h;
}

/// Clips a box to [0,width]x[0,height]. Returns an empty (w or h == 0) box
/// when nothing is left.
inline BBox clamp_to(const BBox& b, double width, double height) {
  const double left = std::clamp(b.x, 0.0, width);
  const double top = std::clamp(b.y, 0.0, height);
  const double right = std::clamp(b.x + b.w, 0.0, width);
  const double bottom = std::clamp(b.y + b.h, 0.0, height);
  return BBox{left, top, std::max(0.0, right - left), std::max(0.0, bottom - top)};
}

inline bool within(const BBox& b, double width, double height) {
  return b.x >= 0 && b.y >= 0 && b.x + b.w <= width && b.y + b.h <= height;
}

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace omniparse
