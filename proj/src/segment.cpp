// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include "topotrack/segment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>

#include "topotrack/errors.hpp"
#include "topotrack/image_io.hpp"

namespace topotrack {

const Segment* Segmentation::find(int id) const {
  for (const Segment& s : segments)
    if (s.id == id) return &s;
  return nullptr;
}

double otsu_threshold(const GrayImage& img) {
  std::array<long, 256> hist{};
  for (double v : img.pixels) {
    int bin = std::min(255, int(v * 256.0));
    hist[size_t(std::max(0, bin))]++;
  }
  int occupied = 0;
  for (long c : hist)
    if (c > 0) ++occupied;
  if (occupied < 2) throw DataError("otsu_threshold: degenerate histogram (constant image)");

  long total = long(img.pixels.size());
  double total_mean = 0.0;
  for (int b = 0; b < 256; ++b) total_mean += double(b) * double(hist[size_t(b)]);
  total_mean /= double(total);

  // Split t puts bins [0,t] in class 0 and (t,255] in class 1; ties keep
  // the lower bin.
  long count0 = 0;
  double sum0 = 0.0;
  double best_bcv = -1.0;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    count0 += hist[size_t(t)];
    sum0 += double(t) * double(hist[size_t(t)]);
    long count1 = total - count0;
    if (count0 == 0 || count1 == 0) continue;
    double mu0 = sum0 / double(count0);
    double mu1 = (total_mean * double(total) - sum0) / double(count1);
    double w0 = double(count0) / double(total);
    double w1 = 1.0 - w0;
    double bcv = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (bcv > best_bcv) {
      best_bcv = bcv;
      best_t = t;
    }
  }
  return double(best_t + 1) / 256.0;
}

BinaryMask binarize(const GrayImage& img, double threshold, Polarity polarity) {
  BinaryMask mask(img.width, img.height);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    bool fg = polarity == Polarity::BrightForeground ? img.pixels[i] >= threshold
                                                     : img.pixels[i] <= threshold;
    mask.data[i] = fg ? 1 : 0;
  }
  return mask;
}

namespace {

std::vector<Pixel> disk_offsets(int radius) {
  std::vector<Pixel> offs;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offs.push_back({dx, dy});
  return offs;
}

BinaryMask erode(const BinaryMask& m, const std::vector<Pixel>& se) {
  BinaryMask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      uint8_t v = 1;
      for (const Pixel& o : se) {
        int xi = std::clamp(x + o.x, 0, m.width - 1);
        int yi = std::clamp(y + o.y, 0, m.height - 1);
        if (!m.at(xi, yi)) {
          v = 0;
          break;
        }
      }
      out.at(x, y) = v;
    }
  return out;
}

BinaryMask dilate(const BinaryMask& m, const std::vector<Pixel>& se) {
  BinaryMask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      uint8_t v = 0;
      for (const Pixel& o : se) {
        int xi = std::clamp(x + o.x, 0, m.width - 1);
        int yi = std::clamp(y + o.y, 0, m.height - 1);
        if (m.at(xi, yi)) {
          v = 1;
          break;
        }
      }
      out.at(x, y) = v;
    }
  return out;
}

}  // namespace

BinaryMask morph_open_close(const BinaryMask& mask, int radius) {
  if (radius < 0) throw ConfigError("morph_open_close: radius must be >= 0");
  if (radius == 0) return mask;
  auto se = disk_offsets(radius);
  BinaryMask opened = dilate(erode(mask, se), se);
  return erode(dilate(opened, se), se);
}

Segmentation connected_components(const BinaryMask& mask, int min_area) {
  if (min_area < 0) throw ConfigError("connected_components: min_area must be >= 0");
  Segmentation seg;
  seg.width = mask.width;
  seg.height = mask.height;
  seg.label_map.assign(size_t(mask.width) * mask.height, 0);

  std::vector<uint8_t> visited(mask.data.size(), 0);
  std::vector<std::vector<Pixel>> components;

  static constexpr int dx8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
  static constexpr int dy8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      size_t idx = size_t(y) * mask.width + x;
      if (!mask.data[idx] || visited[idx]) continue;
      std::vector<Pixel> comp;
      std::deque<Pixel> queue{{x, y}};
      visited[idx] = 1;
      while (!queue.empty()) {
        Pixel p = queue.front();
        queue.pop_front();
        comp.push_back(p);
        for (int k = 0; k < 8; ++k) {
          int nx = p.x + dx8[k], ny = p.y + dy8[k];
          if (nx < 0 || nx >= mask.width || ny < 0 || ny >= mask.height) continue;
          size_t ni = size_t(ny) * mask.width + nx;
          if (mask.data[ni] && !visited[ni]) {
            visited[ni] = 1;
            queue.push_back({nx, ny});
          }
        }
      }
      if (int(comp.size()) >= min_area) components.push_back(std::move(comp));
    }
  }

  // Discovery order is raster order of each component's first pixel.
  int next_id = 1;
  for (auto& comp : components) {
    Segment s;
    s.id = next_id++;
    std::sort(comp.begin(), comp.end());
    s.pixels = std::move(comp);
    s.area = int(s.pixels.size());
    double sx = 0.0, sy = 0.0;
    for (const Pixel& p : s.pixels) {
      sx += p.x;
      sy += p.y;
      s.bbox.expand(p);
      seg.label_map[size_t(p.y) * seg.width + p.x] = s.id;
    }
    s.centroid = {sx / double(s.area), sy / double(s.area)};
    seg.segments.push_back(std::move(s));
  }
  return seg;
}

namespace {

// Clockwise (on screen, y down) Moore neighborhood starting at west.
constexpr int ring_dx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int ring_dy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

int ring_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i)
    if (ring_dx[i] == dx && ring_dy[i] == dy) return i;
  return -1;
}

double shoelace(const std::vector<Vec2>& pts) {
  double a = 0.0;
  size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

}  // namespace

Contour moore_trace(const Segment& seg) {
  if (seg.area < 4 || seg.bbox.x1 - seg.bbox.x0 < 1 || seg.bbox.y1 - seg.bbox.y0 < 1)
    throw DataError("moore_trace: segment too thin for a closed boundary (need area >= 4 and 2x2 extent)");

  // Local mask over the bounding box.
  int w = seg.bbox.x1 - seg.bbox.x0 + 1;
  int h = seg.bbox.y1 - seg.bbox.y0 + 1;
  std::vector<uint8_t> local(size_t(w) * h, 0);
  for (const Pixel& p : seg.pixels)
    local[size_t(p.y - seg.bbox.y0) * w + (p.x - seg.bbox.x0)] = 1;
  auto inside = [&](int x, int y) {
    return x >= 0 && x < w && y >= 0 && y < h && local[size_t(y) * w + x];
  };

  // Raster-first pixel; its west and north neighbors are background.
  Pixel start{seg.pixels.front().x - seg.bbox.x0, seg.pixels.front().y - seg.bbox.y0};

  std::vector<Pixel> boundary{start};
  Pixel cur = start;
  int b_dir = 0;  // backtrack sits west of the start pixel
  int first_dir = -1;
  Pixel first_from{};
  size_t cap = size_t(seg.area) * 4 + 16;

  for (size_t step = 0; step < cap; ++step) {
    int found = -1;
    int prev = b_dir;
    for (int k = 1; k <= 8; ++k) {
      int dir = (b_dir + k) % 8;
      if (inside(cur.x + ring_dx[dir], cur.y + ring_dy[dir])) {
        found = dir;
        break;
      }
      prev = dir;
    }
    if (found < 0) break;  // isolated pixel; cannot happen past the pre-checks
    if (first_dir < 0) {
      first_dir = found;
      first_from = cur;
    } else if (cur == first_from && found == first_dir) {
      break;  // re-entered the first transition: boundary closed
    }
    Pixel next{cur.x + ring_dx[found], cur.y + ring_dy[found]};
    Pixel back{cur.x + ring_dx[prev], cur.y + ring_dy[prev]};
    boundary.push_back(next);
    b_dir = ring_index(back.x - next.x, back.y - next.y);
    cur = next;
  }
  while (boundary.size() > 1 && boundary.back() == boundary.front()) boundary.pop_back();

  Contour c;
  c.points.reserve(boundary.size());
  for (const Pixel& p : boundary)
    c.points.push_back({double(p.x + seg.bbox.x0), double(p.y + seg.bbox.y0)});

  if (c.points.size() < 4 || std::abs(shoelace(c.points)) < 0.5)
    throw DataError("moore_trace: degenerate (line-thin) segment boundary");
  if (shoelace(c.points) < 0.0) std::reverse(c.points.begin(), c.points.end());
  return c;
}

Contour trace_boundary(const Segment& seg, double spacing) {
  return resample(moore_trace(seg), spacing);
}

std::vector<Pixel> rasterize_contour(const Contour& c, int width, int height) {
  std::vector<Pixel> out;
  if (c.points.size() < 3) return out;

  double fx0 = c.points[0].x, fx1 = fx0, fy0 = c.points[0].y, fy1 = fy0;
  for (const Vec2& p : c.points) {
    fx0 = std::min(fx0, p.x);
    fx1 = std::max(fx1, p.x);
    fy0 = std::min(fy0, p.y);
    fy1 = std::max(fy1, p.y);
  }
  int x0 = std::max(0, int(std::floor(fx0)));
  int x1 = std::min(width - 1, int(std::ceil(fx1)));
  int y0 = std::max(0, int(std::floor(fy0)));
  int y1 = std::min(height - 1, int(std::ceil(fy1)));

  size_t n = c.points.size();
  constexpr double eps = 1e-9;
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      double x = px, y = py;
      bool covered = false;
      bool in = false;
      for (size_t i = 0; i < n && !covered; ++i) {
        Vec2 a = c.points[i];
        Vec2 b = c.points[(i + 1) % n];
        Vec2 ab = b - a;
        Vec2 ap = Vec2{x, y} - a;
        double cross = ab.x * ap.y - ab.y * ap.x;
        double len2 = ab.norm2();
        // On-edge counts as covered.
        if (cross * cross <= eps * std::max(len2, 1.0)) {
          double t = len2 > 0.0 ? ap.dot(ab) / len2 : 0.0;
          if (t >= -eps && t <= 1.0 + eps && ap.norm2() - t * t * len2 <= eps) {
            covered = true;
            break;
          }
        }
        if ((a.y > y) != (b.y > y)) {
          double x_int = a.x + (y - a.y) * ab.x / ab.y;
          if (x < x_int) in = !in;
        }
      }
      if (covered || in) out.push_back({px, py});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void validate_partition(const Segmentation& seg) {
  if (seg.label_map.size() != size_t(seg.width) * seg.height)
    throw DataError("segmentation: label map size mismatch");
  long total_area = 0;
  std::vector<uint8_t> seen(seg.label_map.size(), 0);
  for (const Segment& s : seg.segments) {
    if (int(s.pixels.size()) != s.area) throw DataError("segment: area != |pixels|");
    total_area += s.area;
    for (const Pixel& p : s.pixels) {
      if (p.x < s.bbox.x0 || p.x > s.bbox.x1 || p.y < s.bbox.y0 || p.y > s.bbox.y1)
        throw DataError("segment: pixel outside bounding box");
      size_t i = size_t(p.y) * seg.width + p.x;
      if (seen[i]) throw DataError("segmentation: pixel claimed by two segments");
      seen[i] = 1;
      if (seg.label_map[i] != s.id)
        throw DataError("segmentation: pixel set and label map disagree");
    }
  }
  long background = 0;
  for (size_t i = 0; i < seg.label_map.size(); ++i) {
    if (seg.label_map[i] == 0) {
      if (seen[i]) throw DataError("segmentation: labeled pixel marked background");
      ++background;
    } else if (!seen[i]) {
      throw DataError("segmentation: label map references pixel missing from segment sets");
    }
  }
  if (total_area + background != long(seg.width) * seg.height)
    throw DataError("segmentation: segments plus background do not cover the grid");
}

void write_label_map(const std::string& path, const Segmentation& seg) {
  std::vector<uint16_t> labels(seg.label_map.size());
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = uint16_t(seg.label_map[i]);
  write_pgm16(path, seg.width, seg.height, labels);
}

std::string segments_csv_header() {
  return "frame,id,area,cx,cy,bbox_x0,bbox_y0,bbox_x1,bbox_y1";
}

std::string segment_csv_row(int frame, const Segment& seg) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%d,%d,%.6f,%.6f,%d,%d,%d,%d", frame, seg.id, seg.area,
                seg.centroid.x, seg.centroid.y, seg.bbox.x0, seg.bbox.y0, seg.bbox.x1,
                seg.bbox.y1);
  return buf;
}

}  // namespace topotrack
