// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topotrack/geom.hpp"
#include "topotrack/image.hpp"
#include "topotrack/snake.hpp"

namespace topotrack {

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h, uint8_t fill = 0) : width(w), height(h), data(size_t(w) * h, fill) {}

  uint8_t at(int x, int y) const { return data[size_t(y) * width + x]; }
  uint8_t& at(int x, int y) { return data[size_t(y) * width + x]; }
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

enum class Polarity { BrightForeground, DarkForeground };

/// One connected region of a frame. Pixels are kept sorted in raster order.
struct Segment {
  int id = 0;  // frame-unique, positive
  std::vector<Pixel> pixels;
  int area = 0;
  Vec2 centroid;
  BBox bbox;
};

/// Disjoint labeled regions of one frame. Label 0 is background.
struct Segmentation {
  int frame_index = 0;
  int width = 0;
  int height = 0;
  std::vector<Segment> segments;
  std::vector<int> label_map;  // row-major, width*height

  int label_at(int x, int y) const { return label_map[size_t(y) * width + x]; }
  const Segment* find(int id) const;
};

/// Between-class-variance maximizing threshold over a 256-bin histogram,
/// ties broken toward the lower bin. Throws DataError when the histogram is
/// degenerate (fewer than two occupied bins).
double otsu_threshold(const GrayImage& img);

BinaryMask binarize(const GrayImage& img, double threshold, Polarity polarity);

/// Binary opening then closing with a disk structuring element of the given
/// radius; replicate-border convention; radius 0 is a no-op.
BinaryMask morph_open_close(const BinaryMask& mask, int radius);

/// 8-connected components; components smaller than min_area are dropped to
/// background; ids assigned 1..m in raster order of each component's first
/// pixel.
Segmentation connected_components(const BinaryMask& mask, int min_area);

/// Raw Moore-neighbor trace of the segment's outer boundary through pixel
/// centers, oriented so the shoelace area in (x right, y down) pixel
/// coordinates is positive. Throws DataError on degenerate segments.
Contour moore_trace(const Segment& seg);

/// moore_trace followed by arc-length resampling at the given spacing;
/// the bridge from a pixel region to a snake seed.
Contour trace_boundary(const Segment& seg, double spacing = 2.0);

/// Pixels of the image rectangle whose centers lie inside or on the closed
/// contour (even-odd rule; points on an edge count as covered).
std::vector<Pixel> rasterize_contour(const Contour& c, int width, int height);

/// Checks the partition invariant (disjoint cover, label/pixel-set
/// consistency); throws DataError on violation.
void validate_partition(const Segmentation& seg);

/// Label map as 16-bit PGM.
void write_label_map(const std::string& path, const Segmentation& seg);

/// CSV rows "frame,id,area,cx,cy,bbox_x0,bbox_y0,bbox_x1,bbox_y1".
std::string segments_csv_header();
std::string segment_csv_row(int frame, const Segment& seg);

}  // namespace topotrack
