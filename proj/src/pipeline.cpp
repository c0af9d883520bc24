// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include "topotrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "topotrack/errors.hpp"

namespace topotrack {

void SegmenterConfig::validate() const {
  if (morph_radius < 0) throw ConfigError("segmenter.morph_radius must be >= 0");
  if (min_area < 0) throw ConfigError("segmenter.min_area must be >= 0");
}

void PipelineConfig::validate() const {
  snake.validate();
  segmenter.validate();
  align.validate();
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be finite and >= 0");
}

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

namespace {

Segmentation segment_frame(const GrayImage& img, const SegmenterConfig& cfg, int frame_index) {
  double threshold = otsu_threshold(img);
  BinaryMask mask = binarize(img, threshold, cfg.polarity);
  mask = morph_open_close(mask, cfg.morph_radius);
  Segmentation seg = connected_components(mask, cfg.min_area);
  seg.frame_index = frame_index;
  return seg;
}

}  // namespace

FrameResult Pipeline::process_frame(const GrayImage& img, const FrameResult* previous) {
  validate_image(img);
  if (previous && (previous->segmentation.width != img.width ||
                   previous->segmentation.height != img.height))
    throw DataError("process_frame: image dimensions changed mid-sequence");

  FrameResult result;
  result.frame_index = previous ? previous->frame_index + 1 : next_frame_index_;
  next_frame_index_ = result.frame_index + 1;
  result.segmentation = segment_frame(img, cfg_.segmenter, result.frame_index);

  // Identity assignment: matched segments inherit or fork tracks, the rest
  // open fresh ones.
  std::vector<int> still_open;
  if (previous) {
    result.alignment =
        align_frames(previous->segmentation, result.segmentation, cfg_.align);

    for (const Match& m : result.alignment->matches) {
      std::vector<int> parent_tracks;
      for (int seg_id : m.group_t.ids) {
        auto it = previous->segment_to_track.find(seg_id);
        if (it != previous->segment_to_track.end()) parent_tracks.push_back(it->second);
      }
      std::sort(parent_tracks.begin(), parent_tracks.end());

      if (m.event == MatchEvent::OneToOne && parent_tracks.size() == 1) {
        result.segment_to_track[m.group_t1.ids.front()] = parent_tracks.front();
        still_open.push_back(parent_tracks.front());
      } else if (m.event == MatchEvent::Split && parent_tracks.size() == 1) {
        for (int t : parent_tracks) tracks_.at(t).termination = Termination::Split;
        for (int seg_id : m.group_t1.ids) {
          Track child;
          child.id = next_track_id_++;
          child.parent = parent_tracks.front();
          child.first_frame = child.last_frame = result.frame_index;
          tracks_[child.id] = child;
          result.segment_to_track[seg_id] = child.id;
          still_open.push_back(child.id);
        }
      } else {  // merge: parents end, the merged segment starts fresh
        for (int t : parent_tracks) tracks_.at(t).termination = Termination::Merge;
        Track merged;
        merged.id = next_track_id_++;
        merged.first_frame = merged.last_frame = result.frame_index;
        tracks_[merged.id] = merged;
        result.segment_to_track[m.group_t1.ids.front()] = merged.id;
        still_open.push_back(merged.id);
      }
    }
    for (int seg_id : result.alignment->disappearances) {
      auto it = previous->segment_to_track.find(seg_id);
      if (it != previous->segment_to_track.end())
        tracks_.at(it->second).termination = Termination::Disappearance;
    }
    for (int seg_id : result.alignment->appearances) {
      Track fresh;
      fresh.id = next_track_id_++;
      fresh.first_frame = fresh.last_frame = result.frame_index;
      tracks_[fresh.id] = fresh;
      result.segment_to_track[seg_id] = fresh.id;
      still_open.push_back(fresh.id);
    }
  } else {
    for (const Segment& s : result.segmentation.segments) {
      Track fresh;
      fresh.id = next_track_id_++;
      fresh.first_frame = fresh.last_frame = result.frame_index;
      tracks_[fresh.id] = fresh;
      result.segment_to_track[s.id] = fresh.id;
      still_open.push_back(fresh.id);
    }
  }
  open_tracks_ = std::move(still_open);

  // Boundary refinement on the frame's combined energy field.
  ScalarField field = image_energy(img, cfg_.snake.w_line, cfg_.snake.w_edge, cfg_.snake.w_term,
                                   cfg_.sigma);
  for (const Segment& s : result.segmentation.segments) {
    auto track_it = result.segment_to_track.find(s.id);
    if (track_it == result.segment_to_track.end()) continue;
    int track_id = track_it->second;

    TrackEntry entry;
    entry.frame = result.frame_index;
    entry.centroid = s.centroid;
    entry.area = s.area;
    try {
      Contour seed = trace_boundary(s, cfg_.snake.resample_spacing);
      EvolutionReport report = evolve(seed, field, cfg_.snake);
      entry.contour = report.contour;
      result.contours[track_id] = report.contour;
      result.reports[track_id] = std::move(report);
    } catch (const DataError& e) {
      result.warnings.push_back("frame " + std::to_string(result.frame_index) + " segment " +
                                std::to_string(s.id) + ": boundary refinement skipped (" +
                                e.what() + ")");
    }

    Track& track = tracks_.at(track_id);
    int entry_frame = entry.frame;
    if (!track.entries.empty() && entry_frame != track.last_frame + 1)
      throw DataError("track entries must be consecutive");
    if (track.entries.empty()) track.first_frame = entry_frame;
    track.last_frame = entry_frame;
    track.entries.push_back(std::move(entry));
  }
  return result;
}

void Pipeline::finish() {
  for (int id : open_tracks_) tracks_.at(id).termination = Termination::SequenceEnd;
  open_tracks_.clear();
}

std::vector<Track> Pipeline::tracks() const {
  std::vector<Track> out;
  out.reserve(tracks_.size());
  for (const auto& [id, track] : tracks_) out.push_back(track);
  return out;
}

std::pair<std::vector<FrameResult>, std::vector<Track>> track_sequence(
    const std::vector<GrayImage>& images, const PipelineConfig& cfg) {
  if (images.empty()) throw DataError("track_sequence: empty sequence");
  Pipeline pipeline(cfg);
  std::vector<FrameResult> frames;
  frames.reserve(images.size());
  for (const GrayImage& img : images) {
    const FrameResult* previous = frames.empty() ? nullptr : &frames.back();
    frames.push_back(pipeline.process_frame(img, previous));
  }
  pipeline.finish();
  return {std::move(frames), pipeline.tracks()};
}

std::vector<MobilityStats> mobility_stats(const std::vector<Track>& tracks) {
  std::vector<MobilityStats> out;
  for (const Track& t : tracks) {
    MobilityStats s;
    s.track_id = t.id;
    if (t.entries.size() >= 2) {
      for (size_t i = 1; i < t.entries.size(); ++i)
        s.path_length += (t.entries[i].centroid - t.entries[i - 1].centroid).norm();
      s.net_displacement = (t.entries.back().centroid - t.entries.front().centroid).norm();
      s.mean_speed = s.path_length / double(t.entries.size() - 1);
    }
    s.confinement = s.path_length > 0.0 ? s.net_displacement / s.path_length : 1.0;
    out.push_back(s);
  }
  return out;
}

std::string tracks_to_json(const std::vector<Track>& tracks) {
  nlohmann::ordered_json j;
  j["tracks"] = nlohmann::ordered_json::array();
  for (const Track& t : tracks) {
    nlohmann::ordered_json jt;
    jt["id"] = t.id;
    jt["parent"] = t.parent;
    jt["first"] = t.first_frame;
    jt["last"] = t.last_frame;
    jt["entries"] = nlohmann::ordered_json::array();
    for (const TrackEntry& e : t.entries) {
      nlohmann::ordered_json je;
      je["frame"] = e.frame;
      je["cx"] = e.centroid.x;
      je["cy"] = e.centroid.y;
      je["area"] = e.area;
      jt["entries"].push_back(je);
    }
    j["tracks"].push_back(jt);
  }
  return j.dump(2);
}

std::string mobility_to_csv(const std::vector<MobilityStats>& stats) {
  std::string csv = "track,mean_speed,net_disp,path_len,confinement\n";
  char buf[160];
  for (const MobilityStats& s : stats) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f\n", s.track_id, s.mean_speed,
                  s.net_displacement, s.path_length, s.confinement);
    csv += buf;
  }
  return csv;
}

std::string contours_to_json(const std::vector<FrameResult>& frames) {
  nlohmann::ordered_json j;
  j["frames"] = nlohmann::ordered_json::array();
  for (const FrameResult& f : frames) {
    nlohmann::ordered_json jf;
    jf["frame"] = f.frame_index;
    jf["contours"] = nlohmann::ordered_json::array();
    for (const auto& [track_id, contour] : f.contours) {
      nlohmann::ordered_json jc;
      jc["track"] = track_id;
      jc["points"] = nlohmann::ordered_json::array();
      for (const Vec2& p : contour.points) jc["points"].push_back({p.x, p.y});
      jf["contours"].push_back(jc);
    }
    j["frames"].push_back(jf);
  }
  return j.dump(2);
}

}  // namespace topotrack
