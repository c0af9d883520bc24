// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topotrack/geom.hpp"
#include "topotrack/image.hpp"
#include "topotrack/segment.hpp"

namespace topotrack {

struct CellSpec {
  std::vector<Vec2> trajectory;  // one center per frame
  double radius = 8.0;
  double contrast = 0.3;  // added to background inside the disk, in [-1,1]
  std::optional<int> split_frame;
  Vec2 split_offset_a;  // child centers = trajectory + offset from split_frame on
  Vec2 split_offset_b;
};

struct SceneSpec {
  int width = 64;
  int height = 64;
  int frames = 1;
  double background = 0.5;
  double noise_sigma = 0.0;
  uint64_t seed = 0;
  std::vector<CellSpec> cells;

  /// Field-level validation: shapes, ranges, cells inside the image at
  /// every frame. Throws ConfigError.
  void validate() const;
};

/// Exact per-frame geometry, independent of the rendered noise. Each frame
/// is a partition in the segmenter's sense with frame-local ids 1..k.
struct GroundTruth {
  struct Cell {
    int id = 0;
    Vec2 center;       // analytic disk center
    double radius = 0.0;
    std::vector<Pixel> pixels;  // sorted raster order
  };
  struct Frame {
    int frame_index = 0;
    std::vector<Cell> cells;
    std::vector<int> label_map;
  };
  int width = 0;
  int height = 0;
  std::vector<Frame> frames;
};

/// Renders background + anti-aliased disks (1-px soft edge) + seeded
/// Gaussian noise, clamped to [0,1]. Frame f draws its noise from
/// seed + f, so frames are independently reproducible.
std::pair<std::vector<GrayImage>, GroundTruth> render_sequence(const SceneSpec& spec);

/// Jaccard of predicted vs truth pixel sets (both sorted); empty prediction
/// scores 0; empty truth is an error.
double mask_jaccard(const std::vector<Pixel>& predicted, const std::vector<Pixel>& truth);

SceneSpec scene_from_json(const std::string& json_text);
std::string scene_to_json(const SceneSpec& spec);

}  // namespace topotrack
