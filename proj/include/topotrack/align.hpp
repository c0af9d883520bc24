// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "topotrack/segment.hpp"

namespace topotrack {

struct AlignConfig {
  int L = 2;               // max segments per group
  double w_min = 0.2;      // minimum accepted match weight
  int adjacency_gap = 2;   // px of bounding-box dilation for grouping
  int exact_limit = 12;    // candidate-pair count up to which the search is exact

  void validate() const;
};

/// A non-empty set of up to L segments of one frame, with the union of
/// their pixel sets materialized (sorted raster order).
struct SegmentGroup {
  int frame_index = 0;
  std::vector<int> ids;  // sorted ascending
  std::vector<Pixel> union_pixels;
};

enum class MatchEvent { OneToOne, Split, Merge };

struct Match {
  SegmentGroup group_t;
  SegmentGroup group_t1;
  double weight = 0.0;
  MatchEvent event = MatchEvent::OneToOne;
};

struct AlignmentResult {
  int frame_t = 0;
  int frame_t1 = 0;
  std::vector<Match> matches;       // canonical order: t ids, then t1 ids
  std::vector<int> disappearances;  // unmatched segment ids of frame t
  std::vector<int> appearances;     // unmatched segment ids of frame t1
  double total_weight = 0.0;
};

/// Jaccard index |A(p) & A(q)| / |A(p) | A(q)| of two segments' pixel sets.
double overlap_weight(const Segment& p, const Segment& q);

/// Jaccard index of the two groups' union pixel sets.
double group_weight(const SegmentGroup& s, const SegmentGroup& t);

/// All singletons plus every size-2..L id set whose bounding boxes, dilated
/// by adjacency_gap, pairwise intersect.
std::vector<SegmentGroup> candidate_groups(const Segmentation& seg, int L, int adjacency_gap);

/// Maximum-total-weight selection of pairwise segment-disjoint group
/// matches with weight >= w_min. Exact branch-and-bound when the candidate
/// pair count is within cfg.exact_limit, greedy by descending weight
/// otherwise; ties broken by lexicographic id sets either way.
AlignmentResult align_frames(const Segmentation& seg_t, const Segmentation& seg_t1,
                             const AlignConfig& cfg);

/// Exhaustive-enumeration oracle for align_frames; refuses instances with
/// more than 20 candidate pairs.
AlignmentResult brute_force_align(const Segmentation& seg_t, const Segmentation& seg_t1,
                                  const AlignConfig& cfg);

/// (Re)tags each match split/merge/one-to-one from its group sizes.
/// Idempotent.
AlignmentResult classify_events(AlignmentResult r);

/// JSON form:
/// {frame_t, frame_t1, matches:[{t_ids, t1_ids, weight, event}],
///  appearances, disappearances, total_weight}
std::string alignment_to_json(const AlignmentResult& r);

}  // namespace topotrack
