// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the installed CLI binary via subprocess calls.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "topotrack/image_io.hpp"

namespace fs = std::filesystem;
using testutil::fresh_dir;
using testutil::slurp;
using testutil::spit;

namespace {

const char* cli() { return TOPOTRACK_CLI_PATH; }

int run(const std::string& args, const fs::path& log) {
  std::string cmd = std::string(cli()) + " " + args + " > " + log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string scene_json(int frames, double noise, const std::string& cells) {
  return std::string("{\"width\": 64, \"height\": 64, \"frames\": ") + std::to_string(frames) +
         ", \"background\": 0.2, \"noise_sigma\": " + std::to_string(noise) +
         ", \"seed\": 11, \"cells\": [" + cells + "]}";
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("segment subcommand") {
  auto dir = fresh_dir("cli_segment");
  auto log = dir / "log.txt";

  SUBCASE("valid PGM in, label map and CSV out, exit 0") {
    topotrack::GrayImage img = testutil::disk_image(32, 32, {16, 16}, 8, 0.2, 0.8);
    topotrack::write_pgm((dir / "in.pgm").string(), img);
    int rc = run("segment " + (dir / "in.pgm").string() + " --out " + (dir / "out").string() +
                     " --set segmenter.polarity=bright",
                 log);
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "out" / "labels_000.pgm"));
    std::string csv = slurp(dir / "out" / "segments.csv");
    CHECK(csv.rfind("frame,id,area", 0) == 0);
    CHECK(csv.find("\n0,1,") != std::string::npos);
  }
  SUBCASE("constant image: exit 2 with a degenerate-histogram diagnostic") {
    topotrack::write_pgm((dir / "flat.pgm").string(), testutil::constant_image(16, 16, 0.5));
    int rc = run("segment " + (dir / "flat.pgm").string() + " --out " + dir.string(), log);
    CHECK(rc == 2);
    CHECK(slurp(log).find("degenerate histogram") != std::string::npos);
  }
  SUBCASE("missing file: exit 2") {
    int rc = run("segment " + (dir / "nope.pgm").string() + " --out " + dir.string(), log);
    CHECK(rc == 2);
  }
  SUBCASE("bad config value: exit 3") {
    topotrack::write_pgm((dir / "in.pgm").string(),
                         testutil::disk_image(32, 32, {16, 16}, 8, 0.2, 0.8));
    int rc = run("segment " + (dir / "in.pgm").string() + " --set snake.gamma=-1", log);
    CHECK(rc == 3);
  }
  SUBCASE("unknown config key: exit 3") {
    topotrack::write_pgm((dir / "in.pgm").string(),
                         testutil::disk_image(32, 32, {16, 16}, 8, 0.2, 0.8));
    int rc = run("segment " + (dir / "in.pgm").string() + " --set bogus.key=1", log);
    CHECK(rc == 3);
    CHECK(slurp(log).find("unknown key") != std::string::npos);
  }
}

TEST_CASE("synth subcommand") {
  auto dir = fresh_dir("cli_synth");
  auto log = dir / "log.txt";
  spit(dir / "scene.json",
       scene_json(5, 0.02, R"({"radius": 8, "contrast": 0.5, "start": [20, 32], "velocity": [2, 0]})"));

  SUBCASE("5-frame spec: five frames plus ground truth") {
    int rc = run("synth " + (dir / "scene.json").string() + " --out " + (dir / "a").string(), log);
    CHECK(rc == 0);
    for (int f = 0; f < 5; ++f) {
      CHECK(fs::exists(dir / "a" / ("frame_00" + std::to_string(f) + ".pgm")));
      CHECK(fs::exists(dir / "a" / "truth" / ("truth_00" + std::to_string(f) + ".pgm")));
    }
    CHECK(fs::exists(dir / "a" / "truth" / "truth.csv"));
  }
  SUBCASE("fixed seed runs are byte-identical") {
    REQUIRE(run("synth " + (dir / "scene.json").string() + " --out " + (dir / "r1").string(), log) == 0);
    REQUIRE(run("synth " + (dir / "scene.json").string() + " --out " + (dir / "r2").string(), log) == 0);
    for (const auto& entry : fs::recursive_directory_iterator(dir / "r1")) {
      if (!entry.is_regular_file()) continue;
      fs::path rel = fs::relative(entry.path(), dir / "r1");
      CHECK(same_bytes(entry.path(), dir / "r2" / rel));
    }
  }
  SUBCASE("invalid spec (cell outside image): exit 3 with a field-level message") {
    spit(dir / "bad.json",
         scene_json(1, 0.0, R"({"radius": 40, "contrast": 0.5, "start": [10, 10]})"));
    int rc = run("synth " + (dir / "bad.json").string() + " --out " + dir.string(), log);
    CHECK(rc == 3);
    CHECK(slurp(log).find("leaves the image") != std::string::npos);
  }
}

TEST_CASE("track subcommand") {
  auto dir = fresh_dir("cli_track");
  auto log = dir / "log.txt";
  spit(dir / "scene.json",
       scene_json(5, 0.01,
                  R"({"radius": 8, "contrast": 0.5, "start": [20, 32], "velocity": [2, 0]},
                     {"radius": 6, "contrast": 0.5, "start": [48, 16], "velocity": [0, 1.5]})"));
  REQUIRE(run("synth " + (dir / "scene.json").string() + " --out " + (dir / "seq").string(), log) == 0);

  SUBCASE("tracks JSON holds the expected track count; no overlays by default") {
    int rc = run("track " + (dir / "seq").string() + " --out " + (dir / "out").string() +
                     " --set segmenter.polarity=bright",
                 log);
    CHECK(rc == 0);
    std::string tracks = slurp(dir / "out" / "tracks.json");
    CHECK(tracks.find("\"id\": 1") != std::string::npos);
    CHECK(tracks.find("\"id\": 2") != std::string::npos);
    CHECK(tracks.find("\"id\": 3") == std::string::npos);  // exactly two tracks
    CHECK(fs::exists(dir / "out" / "mobility.csv"));
    CHECK(fs::exists(dir / "out" / "contours.json"));
    CHECK(fs::exists(dir / "out" / "labels_004.pgm"));
    bool any_png = false;
    for (const auto& entry : fs::directory_iterator(dir / "out"))
      if (entry.path().extension() == ".png") any_png = true;
    CHECK_FALSE(any_png);
  }
  SUBCASE("--overlay writes one PNG per frame") {
    int rc = run("track " + (dir / "seq").string() + " --out " + (dir / "ov").string() +
                     " --overlay --set segmenter.polarity=bright",
                 log);
    CHECK(rc == 0);
    for (int f = 0; f < 5; ++f)
      CHECK(fs::exists(dir / "ov" / ("overlay_00" + std::to_string(f) + ".png")));
  }
  SUBCASE("empty directory: exit 2") {
    fs::create_directories(dir / "empty");
    CHECK(run("track " + (dir / "empty").string() + " --out " + dir.string(), log) == 2);
  }
}

TEST_CASE("compare subcommand") {
  auto dir = fresh_dir("cli_compare");
  auto log = dir / "log.txt";

  SUBCASE("high-contrast static disk: both methods score >= 0.9") {
    spit(dir / "scene.json",
         scene_json(1, 0.0, R"({"radius": 15, "contrast": 0.6, "start": [32, 32]})"));
    REQUIRE(run("synth " + (dir / "scene.json").string() + " --out " + (dir / "seq").string(),
                log) == 0);
    int rc = run("compare " + (dir / "seq").string() + " " + (dir / "seq" / "truth").string() +
                     " --out " + (dir / "cmp").string() +
                     " --set segmenter.polarity=bright --set snake.alpha=1.0"
                     " --set snake.w_edge=10 --set snake.move_tol=0.005"
                     " --set snake.max_iterations=800",
                 log);
    CHECK(rc == 0);
    std::string csv = slurp(dir / "cmp" / "metrics.csv");
    REQUIRE(csv.rfind("frame,method,jaccard\n", 0) == 0);
    double plain = -1, hybrid = -1;
    std::sscanf(csv.c_str(), "frame,method,jaccard\n0,plain,%lf\n0,hybrid,%lf", &plain, &hybrid);
    CHECK(plain >= 0.9);
    CHECK(hybrid >= 0.9);
  }
  SUBCASE("mismatched truth directory: exit 2") {
    spit(dir / "scene.json",
         scene_json(2, 0.0, R"({"radius": 10, "contrast": 0.5, "start": [32, 32]})"));
    REQUIRE(run("synth " + (dir / "scene.json").string() + " --out " + (dir / "seq2").string(),
                log) == 0);
    fs::create_directories(dir / "empty_truth");
    int rc = run("compare " + (dir / "seq2").string() + " " + (dir / "empty_truth").string() +
                     " --out " + (dir / "cmp2").string(),
                 log);
    CHECK(rc == 2);
  }
}

TEST_CASE("help exits 0 and documents flags on every subcommand") {
  auto dir = fresh_dir("cli_help");
  for (const char* sub : {"segment", "track", "synth", "compare"}) {
    auto log = dir / (std::string(sub) + ".txt");
    CHECK(run(std::string(sub) + " --help", log) == 0);
    std::string text = slurp(log);
    CHECK(text.find("--config") != std::string::npos);
    CHECK(text.find("--set") != std::string::npos);
    CHECK(text.find("--out") != std::string::npos);
  }
}

TEST_CASE("config file plus --set override precedence") {
  auto dir = fresh_dir("cli_config");
  auto log = dir / "log.txt";
  spit(dir / "cfg.json", R"({"segmenter.polarity": "bright", "segmenter.min_area": 10})");
  topotrack::GrayImage img = testutil::disk_image(32, 32, {16, 16}, 8, 0.2, 0.8);
  topotrack::write_pgm((dir / "in.pgm").string(), img);
  int rc = run("segment " + (dir / "in.pgm").string() + " --config " + (dir / "cfg.json").string() +
                   " --out " + (dir / "out").string() + " --set segmenter.min_area=500",
               log);
  CHECK(rc == 0);
  // min_area 500 swallows the radius-8 disk, so no segment rows remain.
  std::string csv = slurp(dir / "out" / "segments.csv");
  CHECK(csv == "frame,id,area,cx,cy,bbox_x0,bbox_y0,bbox_x1,bbox_y1\n");
}

TEST_SUITE_END();
