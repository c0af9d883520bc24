// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include "topotrack/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace topotrack {

Rgb track_color(int track_id) {
  // Golden-angle hue walk; saturated, full value.
  double hue = std::fmod(double(track_id) * 137.50776405, 360.0);
  double h = hue / 60.0;
  double f = h - std::floor(h);
  auto byte = [](double v) { return uint8_t(std::lround(v * 255.0)); };
  switch (int(h) % 6) {
    case 0: return {255, byte(f), 0};
    case 1: return {byte(1 - f), 255, 0};
    case 2: return {0, 255, byte(f)};
    case 3: return {0, byte(1 - f), 255};
    case 4: return {byte(f), 0, 255};
    default: return {255, 0, byte(1 - f)};
  }
}

RgbImage to_rgb(const GrayImage& img) {
  RgbImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      auto v = uint8_t(std::lround(std::clamp(img.at(x, y), 0.0, 1.0) * 255.0));
      out.set(x, y, v, v, v);
    }
  return out;
}

namespace {

void put(RgbImage& img, int x, int y, Rgb c) {
  if (x >= 0 && x < img.width && y >= 0 && y < img.height) img.set(x, y, c.r, c.g, c.b);
}

void draw_line(RgbImage& img, Vec2 a, Vec2 b, Rgb c) {
  int x0 = int(std::lround(a.x)), y0 = int(std::lround(a.y));
  int x1 = int(std::lround(b.x)), y1 = int(std::lround(b.y));
  int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

// 3x5 digit glyphs, rows packed LSB = leftmost pixel.
constexpr uint8_t kDigits[10][5] = {
    {7, 5, 5, 5, 7},  // 0
    {2, 3, 2, 2, 7},  // 1
    {7, 4, 7, 1, 7},  // 2
    {7, 4, 7, 4, 7},  // 3
    {5, 5, 7, 4, 4},  // 4
    {7, 1, 7, 4, 7},  // 5
    {7, 1, 7, 5, 7},  // 6
    {7, 4, 4, 4, 4},  // 7
    {7, 5, 7, 5, 7},  // 8
    {7, 5, 7, 4, 7},  // 9
};

}  // namespace

void draw_contour(RgbImage& img, const Contour& c, Rgb color) {
  size_t n = c.points.size();
  for (size_t i = 0; i < n; ++i) draw_line(img, c.points[i], c.points[(i + 1) % n], color);
}

void draw_label(RgbImage& img, int x, int y, int number, Rgb color) {
  std::string digits = std::to_string(std::abs(number));
  for (size_t d = 0; d < digits.size(); ++d) {
    int glyph = digits[d] - '0';
    for (int row = 0; row < 5; ++row)
      for (int col = 0; col < 3; ++col)
        if (kDigits[glyph][row] & (1 << col)) put(img, x + int(d) * 4 + col, y + row, color);
  }
}

void draw_overlay(RgbImage& img, const std::map<int, Contour>& contours) {
  for (const auto& [track_id, contour] : contours) {
    Rgb color = track_color(track_id);
    draw_contour(img, contour, color);
    Vec2 c = contour.centroid_of_nodes();
    draw_label(img, int(std::lround(c.x)) - 1, int(std::lround(c.y)) - 2, track_id, color);
  }
}

}  // namespace topotrack
