// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "topotrack/geom.hpp"
#include "topotrack/image.hpp"

namespace topotrack {

/// Closed sub-pixel polyline: node i sits at curve parameter s_i = i*l/N
/// where l is the polygonal perimeter. Node N-1 connects back to node 0;
/// the first node is not duplicated at the end.
struct Contour {
  std::vector<Vec2> points;

  size_t size() const { return points.size(); }
  double perimeter() const;
  Vec2 centroid_of_nodes() const;
};

struct SnakeParams {
  double alpha = 0.1;            // elasticity weight
  double beta = 0.4;             // rigidity weight
  double w_line = 0.0;           // image-energy weights
  double w_edge = 2.0;
  double w_term = 0.0;
  double gamma = 1.0;            // per-iteration damping
  int max_iterations = 200;
  double move_tol = 0.05;        // px; convergence on max node displacement
  double resample_spacing = 2.0; // px
  int resample_every = 5;        // iterations between resampling passes

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

struct EvolutionReport {
  Contour contour;
  int iterations = 0;
  std::vector<double> energy_history;  // total energy after each iteration
  bool converged = false;
};

/// Discrete internal spline energy
///   sum_i [ alpha*|v_i - v_{i-1}|^2 / h^2 + beta*|v_{i+1} - 2 v_i + v_{i-1}|^2 / h^4 ] * h/2
/// with cyclic indices and h = perimeter/N (h = 1 for a zero-perimeter
/// contour).
double internal_energy(const Contour& c, double alpha, double beta);

/// Exact per-node gradient of internal_energy, including the sensitivity
/// of the parameter step h to node positions (h varies with the perimeter,
/// so the gradient is the cyclic pentadiagonal stencil plus an arc-step
/// correction).
std::vector<Vec2> internal_energy_gradient(const Contour& c, double alpha, double beta);

/// Trapezoidal line integral of the field along the closed contour:
/// sum_i bilinear_sample(field, v_i) * h.
double contour_image_energy(const Contour& c, const ScalarField& field);

/// internal + image + optional external field energy.
double total_energy(const Contour& c, const ScalarField& field, const SnakeParams& params,
                    const ScalarField* external = nullptr);

/// One semi-implicit step: solves (gamma*I + A) v_new = gamma*v_old + F(v_old)
/// per coordinate, where A is the pentadiagonal internal-energy operator
/// built from the contour's current h, and F samples the force field
/// bilinearly at the nodes. Nodes are clamped to the field rectangle.
Contour evolve_step(const Contour& c, const VectorField& force, const SnakeParams& params);

/// Redistributes nodes at uniform arc length ~= spacing along the closed
/// polyline; node count max(4, round(perimeter/spacing)). Throws DataError
/// on a zero-perimeter contour.
Contour resample(const Contour& c, double spacing);

/// Evolves the contour on the combined field (+ optional external field)
/// until the max node displacement drops below move_tol or max_iterations
/// is reached, resampling every resample_every iterations.
EvolutionReport evolve(const Contour& c, const ScalarField& field, const SnakeParams& params,
                       const ScalarField* external = nullptr);

/// One-contour-per-line text form: "id, N, x0, y0, x1, y1, ..." with six
/// fractional digits.
std::string contour_to_text(int id, const Contour& c);
Contour contour_from_text(const std::string& line, int* id_out = nullptr);

}  // namespace topotrack
