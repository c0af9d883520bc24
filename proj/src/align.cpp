// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include "topotrack/align.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "topotrack/errors.hpp"

namespace topotrack {

void AlignConfig::validate() const {
  if (L < 1) throw ConfigError("align.L must be >= 1");
  if (!(w_min >= 0.0) || !(w_min <= 1.0)) throw ConfigError("align.w_min must be in [0,1]");
  if (adjacency_gap < 0) throw ConfigError("align.adjacency_gap must be >= 0");
  if (exact_limit < 0) throw ConfigError("align.exact_limit must be >= 0");
}

namespace {

size_t sorted_intersection_count(const std::vector<Pixel>& a, const std::vector<Pixel>& b) {
  size_t i = 0, j = 0, count = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

double jaccard(const std::vector<Pixel>& a, const std::vector<Pixel>& b) {
  if (a.empty() || b.empty()) throw DataError("overlap weight of an empty pixel set");
  size_t inter = sorted_intersection_count(a, b);
  size_t uni = a.size() + b.size() - inter;
  return double(inter) / double(uni);
}

}  // namespace

double overlap_weight(const Segment& p, const Segment& q) { return jaccard(p.pixels, q.pixels); }

double group_weight(const SegmentGroup& s, const SegmentGroup& t) {
  return jaccard(s.union_pixels, t.union_pixels);
}

namespace {

SegmentGroup make_group(const Segmentation& seg, std::vector<int> ids) {
  SegmentGroup g;
  g.frame_index = seg.frame_index;
  std::sort(ids.begin(), ids.end());
  g.ids = std::move(ids);
  for (int id : g.ids) {
    const Segment* s = seg.find(id);
    if (!s) throw DataError("segment group references unknown segment id");
    g.union_pixels.insert(g.union_pixels.end(), s->pixels.begin(), s->pixels.end());
  }
  std::sort(g.union_pixels.begin(), g.union_pixels.end());
  return g;
}

}  // namespace

std::vector<SegmentGroup> candidate_groups(const Segmentation& seg, int L, int adjacency_gap) {
  if (L < 1) throw ConfigError("candidate_groups: L must be >= 1");
  std::vector<SegmentGroup> groups;
  for (const Segment& s : seg.segments) groups.push_back(make_group(seg, {s.id}));

  size_t m = seg.segments.size();
  // Grow id sets one adjacent member at a time; every pair inside a group
  // must have adjacency_gap-dilated bounding boxes that intersect.
  std::vector<std::vector<int>> current;
  for (size_t i = 0; i < m; ++i) current.push_back({int(i)});
  for (int size = 2; size <= L; ++size) {
    std::vector<std::vector<int>> grown;
    for (const auto& idxs : current) {
      for (size_t j = size_t(idxs.back()) + 1; j < m; ++j) {
        bool adjacent = true;
        for (int i : idxs) {
          BBox a = seg.segments[size_t(i)].bbox.dilated(adjacency_gap);
          if (!a.intersects(seg.segments[j].bbox)) {
            adjacent = false;
            break;
          }
        }
        if (!adjacent) continue;
        auto ids = idxs;
        ids.push_back(int(j));
        grown.push_back(ids);
      }
    }
    for (const auto& idxs : grown) {
      std::vector<int> ids;
      for (int i : idxs) ids.push_back(seg.segments[size_t(i)].id);
      groups.push_back(make_group(seg, std::move(ids)));
    }
    current = std::move(grown);
  }
  return groups;
}

namespace {

struct CandidatePair {
  size_t group_t;
  size_t group_t1;
  double weight;
};

// Canonical candidate order: heavier first, then lexicographically smaller
// id sets. This is the deterministic tie-break shared by the exact and
// greedy searches and the brute-force oracle.
bool candidate_before(const CandidatePair& a, const CandidatePair& b,
                      const std::vector<SegmentGroup>& gt, const std::vector<SegmentGroup>& gt1) {
  if (a.weight != b.weight) return a.weight > b.weight;
  if (gt[a.group_t].ids != gt[b.group_t].ids) return gt[a.group_t].ids < gt[b.group_t].ids;
  return gt1[a.group_t1].ids < gt1[b.group_t1].ids;
}

using MatchKey = std::vector<std::pair<std::vector<int>, std::vector<int>>>;

MatchKey selection_key(const std::vector<size_t>& chosen, const std::vector<CandidatePair>& pairs,
                       const std::vector<SegmentGroup>& gt, const std::vector<SegmentGroup>& gt1) {
  MatchKey key;
  for (size_t i : chosen) key.emplace_back(gt[pairs[i].group_t].ids, gt1[pairs[i].group_t1].ids);
  std::sort(key.begin(), key.end());
  return key;
}

constexpr double kWeightTieTol = 1e-12;

// True when (total_a, key_a) beats (total_b, key_b) under the canonical
// comparison: larger total, ties to the lexicographically smaller match set.
bool selection_better(double total_a, const MatchKey& key_a, double total_b,
                      const MatchKey& key_b) {
  if (total_a > total_b + kWeightTieTol) return true;
  if (total_b > total_a + kWeightTieTol) return false;
  return key_a < key_b;
}

struct SearchContext {
  const std::vector<CandidatePair>* pairs;
  const std::vector<SegmentGroup>* groups_t;
  const std::vector<SegmentGroup>* groups_t1;
  std::vector<double> suffix_weight;  // sum of weights from index i on

  std::vector<size_t> best;
  double best_total = -1.0;
  MatchKey best_key;
};

bool compatible(const SearchContext& ctx, size_t candidate, const std::set<int>& used_t,
                const std::set<int>& used_t1) {
  const CandidatePair& p = (*ctx.pairs)[candidate];
  for (int id : (*ctx.groups_t)[p.group_t].ids)
    if (used_t.count(id)) return false;
  for (int id : (*ctx.groups_t1)[p.group_t1].ids)
    if (used_t1.count(id)) return false;
  return true;
}

void mark(const SearchContext& ctx, size_t candidate, std::set<int>& used_t,
          std::set<int>& used_t1, bool on) {
  const CandidatePair& p = (*ctx.pairs)[candidate];
  for (int id : (*ctx.groups_t)[p.group_t].ids) {
    if (on)
      used_t.insert(id);
    else
      used_t.erase(id);
  }
  for (int id : (*ctx.groups_t1)[p.group_t1].ids) {
    if (on)
      used_t1.insert(id);
    else
      used_t1.erase(id);
  }
}

void record_if_better(SearchContext& ctx, const std::vector<size_t>& chosen, double total) {
  MatchKey key = selection_key(chosen, *ctx.pairs, *ctx.groups_t, *ctx.groups_t1);
  if (ctx.best_total < 0.0 || selection_better(total, key, ctx.best_total, ctx.best_key)) {
    ctx.best = chosen;
    ctx.best_total = total;
    ctx.best_key = std::move(key);
  }
}

// Depth-first branch and bound in canonical order, include branch first.
// The optimistic bound adds every remaining weight; pruning keeps ties
// alive so the canonical tie-break still applies.
void branch_and_bound(SearchContext& ctx, size_t index, std::vector<size_t>& chosen, double total,
                      std::set<int>& used_t, std::set<int>& used_t1) {
  if (index == ctx.pairs->size()) {
    record_if_better(ctx, chosen, total);
    return;
  }
  if (ctx.best_total >= 0.0 && total + ctx.suffix_weight[index] < ctx.best_total - kWeightTieTol)
    return;
  if (compatible(ctx, index, used_t, used_t1)) {
    mark(ctx, index, used_t, used_t1, true);
    chosen.push_back(index);
    branch_and_bound(ctx, index + 1, chosen, total + (*ctx.pairs)[index].weight, used_t, used_t1);
    chosen.pop_back();
    mark(ctx, index, used_t, used_t1, false);
  }
  branch_and_bound(ctx, index + 1, chosen, total, used_t, used_t1);
}

// Plain exhaustive enumeration over all 2^n subsets; the independent oracle
// route for the exact search.
void enumerate_all(SearchContext& ctx, size_t index, std::vector<size_t>& chosen, double total,
                   std::set<int>& used_t, std::set<int>& used_t1) {
  if (index == ctx.pairs->size()) {
    record_if_better(ctx, chosen, total);
    return;
  }
  if (compatible(ctx, index, used_t, used_t1)) {
    mark(ctx, index, used_t, used_t1, true);
    chosen.push_back(index);
    enumerate_all(ctx, index + 1, chosen, total + (*ctx.pairs)[index].weight, used_t, used_t1);
    chosen.pop_back();
    mark(ctx, index, used_t, used_t1, false);
  }
  enumerate_all(ctx, index + 1, chosen, total, used_t, used_t1);
}

std::vector<size_t> greedy_select(const SearchContext& ctx) {
  std::vector<size_t> chosen;
  std::set<int> used_t, used_t1;
  for (size_t i = 0; i < ctx.pairs->size(); ++i) {
    if (compatible(ctx, i, used_t, used_t1)) {
      mark(ctx, i, used_t, used_t1, true);
      chosen.push_back(i);
    }
  }
  return chosen;
}

MatchEvent classify(const Match& m) {
  if (m.group_t.ids.size() == 1 && m.group_t1.ids.size() > 1) return MatchEvent::Split;
  if (m.group_t.ids.size() > 1 && m.group_t1.ids.size() == 1) return MatchEvent::Merge;
  return MatchEvent::OneToOne;
}

AlignmentResult build_result(const Segmentation& seg_t, const Segmentation& seg_t1,
                             const std::vector<SegmentGroup>& groups_t,
                             const std::vector<SegmentGroup>& groups_t1,
                             const std::vector<CandidatePair>& pairs,
                             const std::vector<size_t>& chosen) {
  AlignmentResult r;
  r.frame_t = seg_t.frame_index;
  r.frame_t1 = seg_t1.frame_index;
  for (size_t i : chosen) {
    Match m;
    m.group_t = groups_t[pairs[i].group_t];
    m.group_t1 = groups_t1[pairs[i].group_t1];
    m.weight = pairs[i].weight;
    m.event = classify(m);
    r.matches.push_back(std::move(m));
  }
  std::sort(r.matches.begin(), r.matches.end(), [](const Match& a, const Match& b) {
    if (a.group_t.ids != b.group_t.ids) return a.group_t.ids < b.group_t.ids;
    return a.group_t1.ids < b.group_t1.ids;
  });
  r.total_weight = 0.0;
  std::set<int> used_t, used_t1;
  for (const Match& m : r.matches) {
    r.total_weight += m.weight;
    used_t.insert(m.group_t.ids.begin(), m.group_t.ids.end());
    used_t1.insert(m.group_t1.ids.begin(), m.group_t1.ids.end());
  }
  for (const Segment& s : seg_t.segments)
    if (!used_t.count(s.id)) r.disappearances.push_back(s.id);
  for (const Segment& s : seg_t1.segments)
    if (!used_t1.count(s.id)) r.appearances.push_back(s.id);
  return r;
}

std::vector<CandidatePair> collect_pairs(const std::vector<SegmentGroup>& groups_t,
                                         const std::vector<SegmentGroup>& groups_t1,
                                         double w_min) {
  std::vector<CandidatePair> pairs;
  for (size_t i = 0; i < groups_t.size(); ++i) {
    for (size_t j = 0; j < groups_t1.size(); ++j) {
      double w = group_weight(groups_t[i], groups_t1[j]);
      if (w >= w_min && w > 0.0) pairs.push_back({i, j, w});
    }
  }
  return pairs;
}

}  // namespace

AlignmentResult align_frames(const Segmentation& seg_t, const Segmentation& seg_t1,
                             const AlignConfig& cfg) {
  cfg.validate();
  if (seg_t.width != seg_t1.width || seg_t.height != seg_t1.height)
    throw DataError("align_frames: frame dimensions differ");

  auto groups_t = candidate_groups(seg_t, cfg.L, cfg.adjacency_gap);
  auto groups_t1 = candidate_groups(seg_t1, cfg.L, cfg.adjacency_gap);
  auto pairs = collect_pairs(groups_t, groups_t1, cfg.w_min);
  std::sort(pairs.begin(), pairs.end(), [&](const CandidatePair& a, const CandidatePair& b) {
    return candidate_before(a, b, groups_t, groups_t1);
  });

  SearchContext ctx;
  ctx.pairs = &pairs;
  ctx.groups_t = &groups_t;
  ctx.groups_t1 = &groups_t1;

  std::vector<size_t> chosen;
  if (int(pairs.size()) <= cfg.exact_limit) {
    ctx.suffix_weight.assign(pairs.size() + 1, 0.0);
    for (size_t i = pairs.size(); i > 0; --i)
      ctx.suffix_weight[i - 1] = ctx.suffix_weight[i] + pairs[i - 1].weight;
    std::set<int> used_t, used_t1;
    std::vector<size_t> work;
    branch_and_bound(ctx, 0, work, 0.0, used_t, used_t1);
    chosen = ctx.best;
  } else {
    chosen = greedy_select(ctx);
  }
  return build_result(seg_t, seg_t1, groups_t, groups_t1, pairs, chosen);
}

AlignmentResult brute_force_align(const Segmentation& seg_t, const Segmentation& seg_t1,
                                  const AlignConfig& cfg) {
  cfg.validate();
  if (seg_t.width != seg_t1.width || seg_t.height != seg_t1.height)
    throw DataError("brute_force_align: frame dimensions differ");

  auto groups_t = candidate_groups(seg_t, cfg.L, cfg.adjacency_gap);
  auto groups_t1 = candidate_groups(seg_t1, cfg.L, cfg.adjacency_gap);
  auto pairs = collect_pairs(groups_t, groups_t1, cfg.w_min);
  if (pairs.size() > 20) throw DataError("brute_force_align: more than 20 candidate pairs");
  std::sort(pairs.begin(), pairs.end(), [&](const CandidatePair& a, const CandidatePair& b) {
    return candidate_before(a, b, groups_t, groups_t1);
  });

  SearchContext ctx;
  ctx.pairs = &pairs;
  ctx.groups_t = &groups_t;
  ctx.groups_t1 = &groups_t1;
  std::set<int> used_t, used_t1;
  std::vector<size_t> work;
  enumerate_all(ctx, 0, work, 0.0, used_t, used_t1);
  return build_result(seg_t, seg_t1, groups_t, groups_t1, pairs, ctx.best);
}

AlignmentResult classify_events(AlignmentResult r) {
  for (Match& m : r.matches) m.event = classify(m);
  return r;
}

namespace {

const char* event_name(MatchEvent e) {
  switch (e) {
    case MatchEvent::Split:
      return "split";
    case MatchEvent::Merge:
      return "merge";
    default:
      return "one-to-one";
  }
}

}  // namespace

std::string alignment_to_json(const AlignmentResult& r) {
  nlohmann::ordered_json j;
  j["frame_t"] = r.frame_t;
  j["frame_t1"] = r.frame_t1;
  j["matches"] = nlohmann::ordered_json::array();
  for (const Match& m : r.matches) {
    nlohmann::ordered_json jm;
    jm["t_ids"] = m.group_t.ids;
    jm["t1_ids"] = m.group_t1.ids;
    jm["weight"] = m.weight;
    jm["event"] = event_name(m.event);
    j["matches"].push_back(jm);
  }
  j["appearances"] = r.appearances;
  j["disappearances"] = r.disappearances;
  j["total_weight"] = r.total_weight;
  return j.dump(2);
}

}  // namespace topotrack
