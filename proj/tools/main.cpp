// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0
//
// topotrack - cell segmentation and tracking by snake refinement of
// topologically aligned segmentations.
//
// Subcommands: segment, track, synth, compare. Configuration is a flat JSON
// object with dotted keys (--config file, --set key=value overrides).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "topotrack/align.hpp"
#include "topotrack/config.hpp"
#include "topotrack/errors.hpp"
#include "topotrack/image_io.hpp"
#include "topotrack/overlay.hpp"
#include "topotrack/pipeline.hpp"
#include "topotrack/segment.hpp"
#include "topotrack/synth.hpp"

namespace fs = std::filesystem;
using namespace topotrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;      // IO and data errors
constexpr int kExitConfig = 3;  // config and spec validation errors

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "flat JSON config file with dotted keys");
  cmd->add_option("--set", opts.overrides, "config override key=value (repeatable)")
      ->take_all();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "seed override for synthetic scenes");
}

CliConfig resolve_config(const CommonOpts& opts) {
  CliConfig cfg;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw IoError(IoError::Kind::MissingFile, opts.config_path + ": no such file");
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    cfg = config_from_json(text);
  }
  for (const std::string& kv : opts.overrides) apply_override(cfg, kv);
  cfg.validate();
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(IoError::Kind::WriteFailure, dir + ": cannot create output directory");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoError::Kind::WriteFailure, path.string() + ": cannot open");
  out << text;
  if (!out) throw IoError(IoError::Kind::WriteFailure, path.string() + ": write failed");
}

std::vector<std::string> list_frames(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw IoError(IoError::Kind::MissingFile, dir + ": not a directory");
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".pgm" || ext == ".png") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw DataError(dir + ": no .pgm or .png frames found");
  return paths;
}

std::string frame_name(const char* prefix, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03d.%s", prefix, index, ext);
  return buf;
}

int run_segment(const std::vector<std::string>& inputs, const CommonOpts& opts) {
  CliConfig cfg = resolve_config(opts);
  ensure_out_dir(opts.out_dir);
  std::string csv = segments_csv_header() + "\n";
  for (size_t i = 0; i < inputs.size(); ++i) {
    GrayImage img = load_image(inputs[i]);
    double threshold = otsu_threshold(img);
    BinaryMask mask = binarize(img, threshold, cfg.pipeline.segmenter.polarity);
    mask = morph_open_close(mask, cfg.pipeline.segmenter.morph_radius);
    Segmentation seg = connected_components(mask, cfg.pipeline.segmenter.min_area);
    seg.frame_index = int(i);
    write_label_map((fs::path(opts.out_dir) / frame_name("labels", int(i), "pgm")).string(), seg);
    for (const Segment& s : seg.segments) csv += segment_csv_row(int(i), s) + "\n";
  }
  write_text(fs::path(opts.out_dir) / "segments.csv", csv);
  return kExitOk;
}

int run_track(const std::string& input_dir, bool overlay, const CommonOpts& opts) {
  CliConfig cfg = resolve_config(opts);
  ensure_out_dir(opts.out_dir);
  std::vector<GrayImage> images;
  for (const std::string& path : list_frames(input_dir)) images.push_back(load_image(path));

  auto [results, tracks] = track_sequence(images, cfg.pipeline);

  for (const FrameResult& r : results) {
    write_label_map((fs::path(opts.out_dir) / frame_name("labels", r.frame_index, "pgm")).string(),
                    r.segmentation);
    for (const std::string& w : r.warnings) std::cerr << "warning: " << w << "\n";
  }
  write_text(fs::path(opts.out_dir) / "tracks.json", tracks_to_json(tracks));
  write_text(fs::path(opts.out_dir) / "contours.json", contours_to_json(results));
  write_text(fs::path(opts.out_dir) / "mobility.csv", mobility_to_csv(mobility_stats(tracks)));

  if (overlay) {
    for (size_t f = 0; f < results.size(); ++f) {
      RgbImage rgb = to_rgb(images[f]);
      draw_overlay(rgb, results[f].contours);
      write_png((fs::path(opts.out_dir) / frame_name("overlay", int(f), "png")).string(), rgb);
    }
  }
  return kExitOk;
}

int run_synth(const std::string& spec_path, const CommonOpts& opts) {
  std::ifstream in(spec_path);
  if (!in) throw IoError(IoError::Kind::MissingFile, spec_path + ": no such file");
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  SceneSpec spec = scene_from_json(text);
  if (opts.seed_set) spec.seed = opts.seed;
  ensure_out_dir(opts.out_dir);
  // Ground truth lives in a subdirectory so the frame directory stays
  // consumable by `track` as-is.
  fs::path truth_dir = fs::path(opts.out_dir) / "truth";
  ensure_out_dir(truth_dir.string());

  auto [images, truth] = render_sequence(spec);
  std::string csv = segments_csv_header() + "\n";
  for (size_t f = 0; f < images.size(); ++f) {
    write_pgm((fs::path(opts.out_dir) / frame_name("frame", int(f), "pgm")).string(), images[f]);
    const auto& tf = truth.frames[f];
    std::vector<uint16_t> labels(tf.label_map.begin(), tf.label_map.end());
    write_pgm16((truth_dir / frame_name("truth", int(f), "pgm")).string(), truth.width,
                truth.height, labels);
    for (const auto& cell : tf.cells) {
      Segment s;
      s.id = cell.id;
      s.pixels = cell.pixels;
      s.area = int(cell.pixels.size());
      double sx = 0, sy = 0;
      for (const Pixel& p : cell.pixels) {
        sx += p.x;
        sy += p.y;
        s.bbox.expand(p);
      }
      if (s.area > 0) s.centroid = {sx / s.area, sy / s.area};
      csv += segment_csv_row(int(f), s) + "\n";
    }
  }
  write_text(truth_dir / "truth.csv", csv);
  return kExitOk;
}

// Reads a 16-bit truth label PGM back into the union pixel set.
std::vector<Pixel> truth_pixels_from_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::MissingFile, path + ": no such file");
  std::string magic;
  int w = 0, h = 0;
  long maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 65535)
    throw IoError(IoError::Kind::UnsupportedFormat, path + ": expected 16-bit label PGM");
  in.get();
  std::vector<Pixel> px;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int hi = in.get(), lo = in.get();
      if (hi < 0 || lo < 0) throw IoError(IoError::Kind::Truncated, path + ": truncated raster");
      if ((hi << 8 | lo) != 0) px.push_back({x, y});
    }
  return px;
}

int run_compare(const std::string& input_dir, const std::string& truth_dir,
                const CommonOpts& opts) {
  CliConfig cfg = resolve_config(opts);
  ensure_out_dir(opts.out_dir);

  std::vector<GrayImage> images;
  for (const std::string& path : list_frames(input_dir)) images.push_back(load_image(path));

  std::vector<std::string> truth_paths;
  if (!fs::is_directory(truth_dir))
    throw IoError(IoError::Kind::MissingFile, truth_dir + ": not a directory");
  for (const auto& entry : fs::directory_iterator(truth_dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("truth_", 0) == 0 && entry.path().extension() == ".pgm")
      truth_paths.push_back(entry.path().string());
  }
  std::sort(truth_paths.begin(), truth_paths.end());
  if (truth_paths.size() != images.size())
    throw DataError("compare: frame count mismatch between inputs (" +
                    std::to_string(images.size()) + ") and ground truth (" +
                    std::to_string(truth_paths.size()) + ")");

  // (a) plain snake from the image-margin rectangle, no segmentation help
  const SnakeParams& sp = cfg.pipeline.snake;
  std::vector<double> plain_scores;
  for (size_t f = 0; f < images.size(); ++f) {
    const GrayImage& img = images[f];
    ScalarField field = image_energy(img, sp.w_line, sp.w_edge, sp.w_term, cfg.pipeline.sigma);
    double m = double(cfg.compare_margin);
    Contour rect;
    double x1 = img.width - 1 - m, y1 = img.height - 1 - m;
    rect.points = {{m, m}, {x1, m}, {x1, y1}, {m, y1}};
    rect = resample(rect, sp.resample_spacing);
    EvolutionReport rep = evolve(rect, field, sp);
    auto mask = rasterize_contour(rep.contour, img.width, img.height);
    plain_scores.push_back(mask_jaccard(mask, truth_pixels_from_pgm(truth_paths[f])));
  }

  // (b) the full hybrid pipeline
  auto [results, tracks] = track_sequence(images, cfg.pipeline);
  std::vector<double> hybrid_scores;
  for (size_t f = 0; f < results.size(); ++f) {
    std::vector<Pixel> mask;
    for (const auto& [track_id, contour] : results[f].contours) {
      auto filled = rasterize_contour(contour, images[f].width, images[f].height);
      mask.insert(mask.end(), filled.begin(), filled.end());
    }
    std::sort(mask.begin(), mask.end());
    mask.erase(std::unique(mask.begin(), mask.end()), mask.end());
    hybrid_scores.push_back(mask_jaccard(mask, truth_pixels_from_pgm(truth_paths[f])));
  }

  std::string csv = "frame,method,jaccard\n";
  char buf[96];
  for (size_t f = 0; f < images.size(); ++f) {
    std::snprintf(buf, sizeof buf, "%zu,plain,%.6f\n", f, plain_scores[f]);
    csv += buf;
    std::snprintf(buf, sizeof buf, "%zu,hybrid,%.6f\n", f, hybrid_scores[f]);
    csv += buf;
  }
  write_text(fs::path(opts.out_dir) / "metrics.csv", csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell segmentation and tracking with aligned-segmentation snake seeds"};
  app.require_subcommand(1);

  CommonOpts seg_opts, track_opts, synth_opts, cmp_opts;
  std::vector<std::string> seg_inputs;
  std::string track_dir, synth_spec, cmp_dir, cmp_truth;
  bool overlay = false;

  CLI::App* seg = app.add_subcommand("segment", "segment images into labeled regions");
  seg->add_option("images", seg_inputs, "input images (PGM or grayscale PNG)")->required();
  add_common(seg, seg_opts);

  CLI::App* track = app.add_subcommand("track", "segment, align, and refine a frame sequence");
  track->add_option("input", track_dir, "directory of frames, globbed lexicographically")
      ->required();
  track->add_flag("--overlay", overlay, "write per-frame PNG overlays with contours and ids");
  add_common(track, track_opts);

  CLI::App* synth = app.add_subcommand("synth", "render a synthetic ground-truth sequence");
  synth->add_option("spec", synth_spec, "scene spec JSON file")->required();
  add_common(synth, synth_opts);

  CLI::App* compare =
      app.add_subcommand("compare", "score a plain snake against the hybrid pipeline");
  compare->add_option("input", cmp_dir, "directory of frames")->required();
  compare->add_option("truth", cmp_truth, "directory of truth_NNN.pgm label maps")->required();
  add_common(compare, cmp_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  synth_opts.seed_set = synth->count("--seed") > 0;

  try {
    if (seg->parsed()) return run_segment(seg_inputs, seg_opts);
    if (track->parsed()) return run_track(track_dir, overlay, track_opts);
    if (synth->parsed()) return run_synth(synth_spec, synth_opts);
    if (compare->parsed()) return run_compare(cmp_dir, cmp_truth, cmp_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
