// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topotrack/image.hpp"

namespace topotrack {

/// Loads an 8-bit grayscale image (PGM "P5"/"P2" or grayscale PNG),
/// mapping [0,255] linearly to [0,1]. Throws IoError with a distinct kind
/// for missing files, unsupported formats, and non-grayscale inputs.
GrayImage load_image(const std::string& path);

/// 8-bit binary PGM (maxval 255), intensities quantized by rounding.
void write_pgm(const std::string& path, const GrayImage& img);

/// Min-max normalized field dump for visual inspection.
void write_pgm(const std::string& path, const ScalarField& field);

/// 16-bit big-endian PGM (maxval 65535); used for label maps.
void write_pgm16(const std::string& path, int width, int height,
                 const std::vector<uint16_t>& values);

/// Row-major interleaved RGB, 3 bytes per pixel.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(size_t(w) * h * 3, 0) {}

  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    size_t i = (size_t(y) * width + x) * 3;
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
};

void write_png(const std::string& path, const GrayImage& img);
void write_png(const std::string& path, const RgbImage& img);

}  // namespace topotrack
