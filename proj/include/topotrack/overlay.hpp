// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>

#include "topotrack/image_io.hpp"
#include "topotrack/snake.hpp"

namespace topotrack {

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
};

/// Deterministic, well-separated palette indexed by track id.
Rgb track_color(int track_id);

RgbImage to_rgb(const GrayImage& img);

/// 1-px polyline of the closed contour.
void draw_contour(RgbImage& img, const Contour& c, Rgb color);

/// Small bitmap digits; used to stamp track ids at centroids.
void draw_label(RgbImage& img, int x, int y, int number, Rgb color);

/// Contours keyed by track id, each drawn in its track color with the id
/// stamped at the node centroid.
void draw_overlay(RgbImage& img, const std::map<int, Contour>& contours);

}  // namespace topotrack
