// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace topotrack {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Integer pixel coordinate. Ordered row-major (y first) so that sorted
/// pixel vectors enumerate in raster order.
struct Pixel {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Pixel& a, const Pixel& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Inclusive pixel rectangle.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  bool empty() const { return x1 < x0 || y1 < y0; }
  void expand(Pixel p) {
    if (empty()) {
      x0 = x1 = p.x;
      y0 = y1 = p.y;
      return;
    }
    if (p.x < x0) x0 = p.x;
    if (p.x > x1) x1 = p.x;
    if (p.y < y0) y0 = p.y;
    if (p.y > y1) y1 = p.y;
  }
  BBox dilated(int gap) const { return {x0 - gap, y0 - gap, x1 + gap, y1 + gap}; }
  bool intersects(const BBox& o) const {
    return !empty() && !o.empty() && x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

}  // namespace topotrack
