// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "topotrack/geom.hpp"

namespace topotrack {

/// Dense 2-D grid of normalized intensities in [0,1], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0) : width(w), height(h), pixels(size_t(w) * h, fill) {}

  double at(int x, int y) const { return pixels[size_t(y) * width + x]; }
  double& at(int x, int y) { return pixels[size_t(y) * width + x]; }
  size_t size() const { return pixels.size(); }
};

/// Per-pixel scalar values (energy fields). Same shape rules as GrayImage,
/// values unrestricted but finite.
struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(int w, int h, double fill = 0.0) : width(w), height(h), values(size_t(w) * h, fill) {}

  double at(int x, int y) const { return values[size_t(y) * width + x]; }
  double& at(int x, int y) { return values[size_t(y) * width + x]; }
  size_t size() const { return values.size(); }
};

/// Per-pixel 2-vectors, stored as two planes.
struct VectorField {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;

  VectorField() = default;
  VectorField(int w, int h) : width(w), height(h), gx(size_t(w) * h, 0.0), gy(size_t(w) * h, 0.0) {}

  Vec2 at(int x, int y) const {
    size_t i = size_t(y) * width + x;
    return {gx[i], gy[i]};
  }
};

/// Throws ConfigError if the image violates its shape/range invariants.
void validate_image(const GrayImage& img);

/// Separable Gaussian blur, kernel truncated at ceil(3*sigma) and
/// renormalized to sum 1, replicate borders. sigma == 0 is the identity.
GrayImage gaussian_smooth(const GrayImage& img, double sigma);

/// Central differences in the interior, one-sided at borders.
/// Requires width >= 2 and height >= 2.
VectorField gradient(const GrayImage& img);
VectorField gradient(const ScalarField& field);

/// E_line(x,y) = I(x,y); the caller picks the sign via its weight.
ScalarField line_energy(const GrayImage& img);

/// E_edge = -|grad(G_sigma * I)|^2, everywhere <= 0.
ScalarField edge_energy(const GrayImage& img, double sigma);

/// Level-line curvature of the sigma-smoothed image; 0 where the gradient
/// magnitude falls below kTermGradEpsilon. Requires sigma > 0.
ScalarField termination_energy(const GrayImage& img, double sigma);

inline constexpr double kTermGradEpsilon = 1e-6;

/// Pixelwise w_line*E_line + w_edge*E_edge + w_term*E_term. Terms with a
/// zero weight are not evaluated, so sigma constraints apply only to the
/// terms actually used.
ScalarField image_energy(const GrayImage& img, double w_line, double w_edge, double w_term,
                         double sigma);

/// Bilinear interpolation at sub-pixel (x, y); valid for
/// 0 <= x <= width-1, 0 <= y <= height-1.
double bilinear_sample(const ScalarField& field, double x, double y);
Vec2 bilinear_sample(const VectorField& field, double x, double y);

}  // namespace topotrack
