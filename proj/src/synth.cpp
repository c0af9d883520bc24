// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include "topotrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "json.hpp"
#include "topotrack/errors.hpp"

namespace topotrack {

namespace {

// One disk to draw in a frame: a cell, or one of its post-split children.
struct DiskInstance {
  Vec2 center;
  double radius;
  double contrast;
};

std::vector<DiskInstance> disks_at_frame(const SceneSpec& spec, int frame) {
  std::vector<DiskInstance> disks;
  for (const CellSpec& cell : spec.cells) {
    Vec2 base = cell.trajectory[size_t(frame)];
    if (cell.split_frame && frame >= *cell.split_frame) {
      disks.push_back({base + cell.split_offset_a, cell.radius, cell.contrast});
      disks.push_back({base + cell.split_offset_b, cell.radius, cell.contrast});
    } else {
      disks.push_back({base, cell.radius, cell.contrast});
    }
  }
  return disks;
}

}  // namespace

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw ConfigError("scene: width and height must be >= 1");
  if (frames < 1) throw ConfigError("scene: frames must be >= 1");
  if (!(background >= 0.0 && background <= 1.0))
    throw ConfigError("scene: background must be in [0,1]");
  if (!(noise_sigma >= 0.0)) throw ConfigError("scene: noise_sigma must be >= 0");
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    const CellSpec& c = cells[ci];
    std::string tag = "scene: cells[" + std::to_string(ci) + "]";
    if (c.trajectory.size() != size_t(frames))
      throw ConfigError(tag + ".trajectory must have one position per frame");
    if (!(c.radius > 0.0)) throw ConfigError(tag + ".radius must be > 0");
    if (!(c.contrast >= -1.0 && c.contrast <= 1.0))
      throw ConfigError(tag + ".contrast must be in [-1,1]");
    double level = background + c.contrast;
    if (level < 0.0 || level > 1.0)
      throw ConfigError(tag + ".contrast pushes intensity outside [0,1]");
    if (c.split_frame && (*c.split_frame < 0 || *c.split_frame >= frames))
      throw ConfigError(tag + ".split_frame outside the sequence");
  }
  for (int f = 0; f < frames; ++f) {
    auto disks = disks_at_frame(*this, f);
    for (size_t di = 0; di < disks.size(); ++di) {
      const DiskInstance& d = disks[di];
      if (d.center.x - d.radius < 0.0 || d.center.x + d.radius > width - 1 ||
          d.center.y - d.radius < 0.0 || d.center.y + d.radius > height - 1)
        throw ConfigError("scene: cell disk " + std::to_string(di) + " leaves the image at frame " +
                          std::to_string(f));
    }
  }
}

std::pair<std::vector<GrayImage>, GroundTruth> render_sequence(const SceneSpec& spec) {
  spec.validate();
  std::vector<GrayImage> images;
  GroundTruth truth;
  truth.width = spec.width;
  truth.height = spec.height;

  for (int f = 0; f < spec.frames; ++f) {
    auto disks = disks_at_frame(spec, f);
    GrayImage img(spec.width, spec.height, spec.background);

    for (const DiskInstance& d : disks) {
      int x0 = std::max(0, int(std::floor(d.center.x - d.radius - 1)));
      int x1 = std::min(spec.width - 1, int(std::ceil(d.center.x + d.radius + 1)));
      int y0 = std::max(0, int(std::floor(d.center.y - d.radius - 1)));
      int y1 = std::min(spec.height - 1, int(std::ceil(d.center.y + d.radius + 1)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          double dist = std::hypot(x - d.center.x, y - d.center.y);
          double coverage = std::clamp(d.radius + 0.5 - dist, 0.0, 1.0);  // 1-px soft edge
          if (coverage > 0.0) img.at(x, y) += d.contrast * coverage;
        }
      }
    }

    if (spec.noise_sigma > 0.0) {
      std::mt19937_64 rng(spec.seed + uint64_t(f));
      std::normal_distribution<double> noise(0.0, spec.noise_sigma);
      for (double& v : img.pixels) v += noise(rng);
    }
    for (double& v : img.pixels) v = std::clamp(v, 0.0, 1.0);
    images.push_back(std::move(img));

    // Ground truth from the un-noised geometry: a pixel belongs to the disk
    // whose hard radius contains it; overlaps resolve to the nearest center
    // (ties to the lower id).
    GroundTruth::Frame tf;
    tf.frame_index = f;
    tf.label_map.assign(size_t(spec.width) * spec.height, 0);
    for (size_t di = 0; di < disks.size(); ++di) {
      GroundTruth::Cell cell;
      cell.id = int(di) + 1;
      cell.center = disks[di].center;
      cell.radius = disks[di].radius;
      tf.cells.push_back(std::move(cell));
    }
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        int best = 0;
        double best_dist = 0.0;
        for (size_t di = 0; di < disks.size(); ++di) {
          double dist = std::hypot(x - disks[di].center.x, y - disks[di].center.y);
          if (dist <= disks[di].radius && (best == 0 || dist < best_dist)) {
            best = int(di) + 1;
            best_dist = dist;
          }
        }
        if (best > 0) {
          tf.label_map[size_t(y) * spec.width + x] = best;
          tf.cells[size_t(best - 1)].pixels.push_back({x, y});
        }
      }
    }
    truth.frames.push_back(std::move(tf));
  }
  return {std::move(images), std::move(truth)};
}

double mask_jaccard(const std::vector<Pixel>& predicted, const std::vector<Pixel>& truth) {
  if (truth.empty()) throw DataError("mask_jaccard: empty truth pixel set");
  if (predicted.empty()) return 0.0;
  size_t i = 0, j = 0, inter = 0;
  while (i < predicted.size() && j < truth.size()) {
    if (predicted[i] < truth[j])
      ++i;
    else if (truth[j] < predicted[i])
      ++j;
    else {
      ++inter;
      ++i;
      ++j;
    }
  }
  size_t uni = predicted.size() + truth.size() - inter;
  return double(inter) / double(uni);
}

namespace {

Vec2 vec_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("scene: " + what + " must be a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

SceneSpec scene_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scene: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scene: top level must be an object");

  static const std::set<std::string> known{"width",  "height", "frames", "background",
                                           "noise_sigma", "seed", "cells"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("scene: unknown key '" + it.key() + "'");

  SceneSpec spec;
  spec.width = j.value("width", spec.width);
  spec.height = j.value("height", spec.height);
  spec.frames = j.value("frames", spec.frames);
  spec.background = j.value("background", spec.background);
  spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
  spec.seed = j.value("seed", spec.seed);

  if (!j.contains("cells") || !j["cells"].is_array())
    throw ConfigError("scene: 'cells' array is required");
  for (size_t ci = 0; ci < j["cells"].size(); ++ci) {
    const auto& jc = j["cells"][ci];
    std::string tag = "cells[" + std::to_string(ci) + "]";
    static const std::set<std::string> cell_known{"trajectory", "start",        "velocity",
                                                  "radius",     "contrast",     "split_frame",
                                                  "split_offsets"};
    for (auto it = jc.begin(); it != jc.end(); ++it)
      if (!cell_known.count(it.key())) throw ConfigError("scene: unknown key '" + tag + "." + it.key() + "'");

    CellSpec cell;
    cell.radius = jc.value("radius", cell.radius);
    cell.contrast = jc.value("contrast", cell.contrast);
    if (jc.contains("trajectory")) {
      if (jc.contains("start") || jc.contains("velocity"))
        throw ConfigError("scene: " + tag + " must use either trajectory or start/velocity");
      for (const auto& p : jc["trajectory"])
        cell.trajectory.push_back(vec_from_json(p, tag + ".trajectory entry"));
    } else if (jc.contains("start")) {
      Vec2 start = vec_from_json(jc["start"], tag + ".start");
      Vec2 vel = jc.contains("velocity") ? vec_from_json(jc["velocity"], tag + ".velocity") : Vec2{};
      for (int f = 0; f < spec.frames; ++f) cell.trajectory.push_back(start + double(f) * vel);
    } else {
      throw ConfigError("scene: " + tag + " needs a trajectory or a start position");
    }
    if (jc.contains("split_frame")) {
      cell.split_frame = jc["split_frame"].get<int>();
      if (!jc.contains("split_offsets") || !jc["split_offsets"].is_array() ||
          jc["split_offsets"].size() != 2)
        throw ConfigError("scene: " + tag + ".split_offsets must hold two [x,y] pairs");
      cell.split_offset_a = vec_from_json(jc["split_offsets"][0], tag + ".split_offsets[0]");
      cell.split_offset_b = vec_from_json(jc["split_offsets"][1], tag + ".split_offsets[1]");
    }
    spec.cells.push_back(std::move(cell));
  }
  spec.validate();
  return spec;
}

std::string scene_to_json(const SceneSpec& spec) {
  nlohmann::ordered_json j;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["frames"] = spec.frames;
  j["background"] = spec.background;
  j["noise_sigma"] = spec.noise_sigma;
  j["seed"] = spec.seed;
  j["cells"] = nlohmann::ordered_json::array();
  for (const CellSpec& c : spec.cells) {
    nlohmann::ordered_json jc;
    jc["radius"] = c.radius;
    jc["contrast"] = c.contrast;
    jc["trajectory"] = nlohmann::ordered_json::array();
    for (const Vec2& p : c.trajectory) jc["trajectory"].push_back({p.x, p.y});
    if (c.split_frame) {
      jc["split_frame"] = *c.split_frame;
      jc["split_offsets"] = {{c.split_offset_a.x, c.split_offset_a.y},
                             {c.split_offset_b.x, c.split_offset_b.y}};
    }
    j["cells"].push_back(jc);
  }
  return j.dump(2);
}

}  // namespace topotrack
