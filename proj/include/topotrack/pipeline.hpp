// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "topotrack/align.hpp"
#include "topotrack/segment.hpp"
#include "topotrack/snake.hpp"

namespace topotrack {

struct SegmenterConfig {
  Polarity polarity = Polarity::DarkForeground;
  int morph_radius = 1;
  int min_area = 20;

  void validate() const;
};

struct PipelineConfig {
  SnakeParams snake;
  SegmenterConfig segmenter;
  AlignConfig align;
  double sigma = 1.0;  // smoothing for the energy fields

  void validate() const;
};

struct FrameResult {
  int frame_index = 0;
  Segmentation segmentation;
  std::optional<AlignmentResult> alignment;      // absent for frame 0
  std::map<int, int> segment_to_track;           // segment id -> track id
  std::map<int, Contour> contours;               // track id -> refined contour
  std::map<int, EvolutionReport> reports;        // track id -> evolution report
  std::vector<std::string> warnings;             // per-cell skips etc.
};

enum class Termination { SequenceEnd, Disappearance, Merge, Split };

struct TrackEntry {
  int frame = 0;
  Vec2 centroid;
  int area = 0;
  Contour contour;  // empty when boundary refinement was skipped
};

struct Track {
  int id = 0;
  int parent = 0;  // 0 = no parent
  int first_frame = 0;
  int last_frame = 0;
  std::vector<TrackEntry> entries;  // consecutive frames
  Termination termination = Termination::SequenceEnd;
};

struct MobilityStats {
  int track_id = 0;
  double mean_speed = 0.0;    // px/frame
  double net_displacement = 0.0;
  double path_length = 0.0;
  double confinement = 1.0;   // net/path, 1 when path length is 0
};

/// Sequential per-frame driver. Owns the track id allocator so ids are
/// globally unique within a run.
class Pipeline {
public:
  explicit Pipeline(PipelineConfig cfg);

  /// Segments the frame, aligns it to the previous result (if any), updates
  /// track bookkeeping, and refines every segment boundary with a snake on
  /// the frame's combined energy field. A degenerate boundary skips that
  /// cell's refinement with a warning.
  FrameResult process_frame(const GrayImage& img, const FrameResult* previous);

  /// Tracks in progress plus finished ones; call finish() first to close
  /// open tracks at sequence end.
  std::vector<Track> tracks() const;
  void finish();

  const PipelineConfig& config() const { return cfg_; }

private:
  PipelineConfig cfg_;
  int next_track_id_ = 1;
  int next_frame_index_ = 0;
  std::map<int, Track> tracks_;   // by id
  std::vector<int> open_tracks_;  // ids with a live segment in the last frame
};

/// Folds process_frame over the sequence and closes open tracks at the end.
std::pair<std::vector<FrameResult>, std::vector<Track>> track_sequence(
    const std::vector<GrayImage>& images, const PipelineConfig& cfg);

/// Centroid-path statistics per track: mean speed = path/(lifespan-1),
/// net displacement = |last - first|, path length = sum of consecutive
/// centroid distances, confinement = net/path (1 when path is 0).
std::vector<MobilityStats> mobility_stats(const std::vector<Track>& tracks);

/// {"tracks":[{id,parent,first,last,entries:[{frame,cx,cy,area}]}]}
std::string tracks_to_json(const std::vector<Track>& tracks);

/// "track,mean_speed,net_disp,path_len,confinement" CSV.
std::string mobility_to_csv(const std::vector<MobilityStats>& stats);

/// {"frames":[{frame, contours:[{track, points:[[x,y],...]}]}]}
std::string contours_to_json(const std::vector<FrameResult>& frames);

}  // namespace topotrack
