// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include "topotrack/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "topotrack/errors.hpp"

namespace topotrack {

void validate_image(const GrayImage& img) {
  if (img.width < 1 || img.height < 1) throw ConfigError("image dimensions must be >= 1");
  if (img.pixels.size() != size_t(img.width) * img.height)
    throw ConfigError("pixel count does not match width*height");
  for (double v : img.pixels) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ConfigError("image intensity outside [0,1]");
  }
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  int radius = int(std::ceil(3.0 * sigma));
  std::vector<double> k(size_t(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double w = std::exp(-0.5 * double(i) * i / (sigma * sigma));
    k[size_t(i + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

// Separable passes with replicate borders.
void convolve_rows(const std::vector<double>& in, std::vector<double>& out, int w, int h,
                   const std::vector<double>& k) {
  int radius = int(k.size() / 2);
  for (int y = 0; y < h; ++y) {
    const double* row = in.data() + size_t(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int xi = std::clamp(x + i, 0, w - 1);
        acc += k[size_t(i + radius)] * row[xi];
      }
      out[size_t(y) * w + x] = acc;
    }
  }
}

void convolve_cols(const std::vector<double>& in, std::vector<double>& out, int w, int h,
                   const std::vector<double>& k) {
  int radius = int(k.size() / 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int yi = std::clamp(y + i, 0, h - 1);
        acc += k[size_t(i + radius)] * in[size_t(yi) * w + x];
      }
      out[size_t(y) * w + x] = acc;
    }
  }
}

}  // namespace

GrayImage gaussian_smooth(const GrayImage& img, double sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0)
    throw ConfigError("gaussian_smooth: sigma must be finite and >= 0");
  if (sigma == 0.0) return img;

  auto k = gaussian_kernel(sigma);
  GrayImage out(img.width, img.height);
  std::vector<double> tmp(img.pixels.size());
  convolve_rows(img.pixels, tmp, img.width, img.height, k);
  convolve_cols(tmp, out.pixels, img.width, img.height, k);
  return out;
}

namespace {

void gradient_raw(const std::vector<double>& v, int w, int h, VectorField& out) {
  if (w < 2 || h < 2) throw DataError("gradient: image must be at least 2x2");
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t i = size_t(y) * w + x;
      if (x == 0)
        out.gx[i] = v[i + 1] - v[i];
      else if (x == w - 1)
        out.gx[i] = v[i] - v[i - 1];
      else
        out.gx[i] = 0.5 * (v[i + 1] - v[i - 1]);
      if (y == 0)
        out.gy[i] = v[i + w] - v[i];
      else if (y == h - 1)
        out.gy[i] = v[i] - v[i - w];
      else
        out.gy[i] = 0.5 * (v[i + w] - v[i - w]);
    }
  }
}

}  // namespace

VectorField gradient(const GrayImage& img) {
  VectorField out(img.width, img.height);
  gradient_raw(img.pixels, img.width, img.height, out);
  return out;
}

VectorField gradient(const ScalarField& field) {
  VectorField out(field.width, field.height);
  gradient_raw(field.values, field.width, field.height, out);
  return out;
}

ScalarField line_energy(const GrayImage& img) {
  ScalarField out(img.width, img.height);
  out.values = img.pixels;
  return out;
}

ScalarField edge_energy(const GrayImage& img, double sigma) {
  GrayImage smoothed = gaussian_smooth(img, sigma);
  VectorField g = gradient(smoothed);
  ScalarField out(img.width, img.height);
  for (size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = -(g.gx[i] * g.gx[i] + g.gy[i] * g.gy[i]);
  return out;
}

ScalarField termination_energy(const GrayImage& img, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("termination_energy: sigma must be > 0");
  GrayImage c = gaussian_smooth(img, sigma);
  VectorField g1 = gradient(c);

  ScalarField cx(img.width, img.height), cy(img.width, img.height);
  cx.values = g1.gx;
  cy.values = g1.gy;
  VectorField gxx_gxy = gradient(cx);  // gx -> (C_xx, C_xy)
  VectorField gyx_gyy = gradient(cy);  // gy -> (C_yx, C_yy)

  ScalarField out(img.width, img.height);
  for (size_t i = 0; i < out.values.size(); ++i) {
    double dx = g1.gx[i], dy = g1.gy[i];
    double mag2 = dx * dx + dy * dy;
    if (std::sqrt(mag2) < kTermGradEpsilon) {
      out.values[i] = 0.0;
      continue;
    }
    double cxx = gxx_gxy.gx[i];
    double cxy = gxx_gxy.gy[i];
    double cyy = gyx_gyy.gy[i];
    out.values[i] = (cyy * dx * dx - 2.0 * cxy * dx * dy + cxx * dy * dy)
                    / std::pow(mag2, 1.5);
  }
  return out;
}

ScalarField image_energy(const GrayImage& img, double w_line, double w_edge, double w_term,
                         double sigma) {
  if (!std::isfinite(w_line) || !std::isfinite(w_edge) || !std::isfinite(w_term))
    throw ConfigError("image_energy: weights must be finite");
  ScalarField out(img.width, img.height, 0.0);
  if (w_line != 0.0) {
    ScalarField e = line_energy(img);
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += w_line * e.values[i];
  }
  if (w_edge != 0.0) {
    ScalarField e = edge_energy(img, sigma);
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += w_edge * e.values[i];
  }
  if (w_term != 0.0) {
    ScalarField e = termination_energy(img, sigma);
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += w_term * e.values[i];
  }
  return out;
}

namespace {

struct BilinearWeights {
  size_t i00, i10, i01, i11;
  double w00, w10, w01, w11;
};

BilinearWeights bilinear_weights(int width, int height, double x, double y) {
  if (!(x >= 0.0) || !(y >= 0.0) || !(x <= width - 1) || !(y <= height - 1))
    throw std::out_of_range("bilinear_sample: coordinates outside the grid");
  int x0 = std::min(int(x), width - 2 < 0 ? 0 : width - 2);
  int y0 = std::min(int(y), height - 2 < 0 ? 0 : height - 2);
  if (width == 1) x0 = 0;
  if (height == 1) y0 = 0;
  double fx = x - x0;
  double fy = y - y0;
  int x1 = std::min(x0 + 1, width - 1);
  int y1 = std::min(y0 + 1, height - 1);
  BilinearWeights w;
  w.i00 = size_t(y0) * width + x0;
  w.i10 = size_t(y0) * width + x1;
  w.i01 = size_t(y1) * width + x0;
  w.i11 = size_t(y1) * width + x1;
  w.w00 = (1 - fx) * (1 - fy);
  w.w10 = fx * (1 - fy);
  w.w01 = (1 - fx) * fy;
  w.w11 = fx * fy;
  return w;
}

}  // namespace

double bilinear_sample(const ScalarField& field, double x, double y) {
  auto w = bilinear_weights(field.width, field.height, x, y);
  const auto& v = field.values;
  return w.w00 * v[w.i00] + w.w10 * v[w.i10] + w.w01 * v[w.i01] + w.w11 * v[w.i11];
}

Vec2 bilinear_sample(const VectorField& field, double x, double y) {
  auto w = bilinear_weights(field.width, field.height, x, y);
  return {w.w00 * field.gx[w.i00] + w.w10 * field.gx[w.i10] + w.w01 * field.gx[w.i01] +
              w.w11 * field.gx[w.i11],
          w.w00 * field.gy[w.i00] + w.w10 * field.gy[w.i10] + w.w01 * field.gy[w.i01] +
              w.w11 * field.gy[w.i11]};
}

}  // namespace topotrack
