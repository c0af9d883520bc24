// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "topotrack/geom.hpp"
#include "topotrack/image.hpp"
#include "topotrack/segment.hpp"
#include "topotrack/snake.hpp"

namespace testutil {

using topotrack::BinaryMask;
using topotrack::Contour;
using topotrack::GrayImage;
using topotrack::Pixel;
using topotrack::Segment;
using topotrack::Segmentation;
using topotrack::Vec2;

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("topotrack_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline GrayImage constant_image(int w, int h, double v) { return GrayImage(w, h, v); }

/// Hard disk on a background; no soft edge, no noise.
inline GrayImage disk_image(int w, int h, Vec2 center, double radius, double bg, double fg) {
  GrayImage img(w, h, bg);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (std::hypot(x - center.x, y - center.y) <= radius) img.at(x, y) = fg;
  return img;
}

inline std::vector<Pixel> disk_pixels(int w, int h, Vec2 center, double radius) {
  std::vector<Pixel> px;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (std::hypot(x - center.x, y - center.y) <= radius) px.push_back({x, y});
  return px;
}

inline Contour regular_polygon(int n, Vec2 center, double radius, double phase = 0.0) {
  Contour c;
  for (int i = 0; i < n; ++i) {
    double a = phase + 2.0 * M_PI * double(i) / double(n);
    c.points.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return c;
}

inline Contour random_contour(std::mt19937_64& rng, int min_n = 8, int max_n = 64,
                              double lo = 0.0, double hi = 100.0) {
  std::uniform_int_distribution<int> nd(min_n, max_n);
  std::uniform_real_distribution<double> cd(lo, hi);
  Contour c;
  int n = nd(rng);
  for (int i = 0; i < n; ++i) c.points.push_back({cd(rng), cd(rng)});
  return c;
}

/// Independent Jaccard by explicit set counting over a grid.
inline double jaccard_by_grid(const std::vector<Pixel>& a, const std::vector<Pixel>& b, int w,
                              int h) {
  std::vector<uint8_t> in_a(size_t(w) * h, 0), in_b(size_t(w) * h, 0);
  for (const Pixel& p : a) in_a[size_t(p.y) * w + p.x] = 1;
  for (const Pixel& p : b) in_b[size_t(p.y) * w + p.x] = 1;
  long inter = 0, uni = 0;
  for (size_t i = 0; i < in_a.size(); ++i) {
    if (in_a[i] && in_b[i]) ++inter;
    if (in_a[i] || in_b[i]) ++uni;
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

/// Builds a Segment the way the segmenter would, from an arbitrary pixel set.
inline Segment make_segment(int id, std::vector<Pixel> pixels) {
  Segment s;
  s.id = id;
  std::sort(pixels.begin(), pixels.end());
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  s.pixels = std::move(pixels);
  s.area = int(s.pixels.size());
  double sx = 0, sy = 0;
  for (const Pixel& p : s.pixels) {
    sx += p.x;
    sy += p.y;
    s.bbox.expand(p);
  }
  s.centroid = {sx / s.area, sy / s.area};
  return s;
}

/// Builds a consistent Segmentation from explicit per-segment pixel sets.
inline Segmentation make_segmentation(int w, int h, int frame,
                                      const std::vector<std::vector<Pixel>>& per_segment) {
  Segmentation seg;
  seg.width = w;
  seg.height = h;
  seg.frame_index = frame;
  seg.label_map.assign(size_t(w) * h, 0);
  int id = 1;
  for (const auto& pixels : per_segment) {
    Segment s = make_segment(id++, pixels);
    for (const Pixel& p : s.pixels) seg.label_map[size_t(p.y) * w + p.x] = s.id;
    seg.segments.push_back(std::move(s));
  }
  return seg;
}

}  // namespace testutil
