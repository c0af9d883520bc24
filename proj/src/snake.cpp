// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include "topotrack/snake.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "topotrack/errors.hpp"

namespace topotrack {

double Contour::perimeter() const {
  double p = 0.0;
  size_t n = points.size();
  for (size_t i = 0; i < n; ++i) p += (points[i] - points[(i + n - 1) % n]).norm();
  return p;
}

Vec2 Contour::centroid_of_nodes() const {
  Vec2 c;
  for (const Vec2& p : points) c = c + p;
  double n = points.empty() ? 1.0 : double(points.size());
  return {c.x / n, c.y / n};
}

void SnakeParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("snake.alpha must be >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("snake.beta must be >= 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("snake.gamma must be > 0");
  if (!std::isfinite(w_line) || !std::isfinite(w_edge) || !std::isfinite(w_term))
    throw ConfigError("snake energy weights must be finite");
  if (max_iterations < 1) throw ConfigError("snake.max_iterations must be >= 1");
  if (!(move_tol > 0.0)) throw ConfigError("snake.move_tol must be > 0");
  if (!(resample_spacing >= 1.0)) throw ConfigError("snake.resample_spacing must be >= 1");
  if (resample_every < 1) throw ConfigError("snake.resample_every must be >= 1");
}

namespace {

void check_contour(const Contour& c) {
  if (c.points.size() < 4) throw ConfigError("contour must have at least 4 nodes");
  for (const Vec2& p : c.points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw ConfigError("contour coordinates must be finite");
}

double param_step(const Contour& c) {
  double p = c.perimeter();
  return p > 0.0 ? p / double(c.points.size()) : 1.0;
}

}  // namespace

double internal_energy(const Contour& c, double alpha, double beta) {
  check_contour(c);
  size_t n = c.points.size();
  double h = param_step(c);
  double s1 = 0.0, s2 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    Vec2 d = c.points[i] - c.points[(i + n - 1) % n];
    Vec2 s = c.points[(i + 1) % n] - 2.0 * c.points[i] + c.points[(i + n - 1) % n];
    s1 += d.norm2();
    s2 += s.norm2();
  }
  return (alpha * s1 / (h * h) + beta * s2 / (h * h * h * h)) * h / 2.0;
}

std::vector<Vec2> internal_energy_gradient(const Contour& c, double alpha, double beta) {
  check_contour(c);
  size_t n = c.points.size();
  double perim = c.perimeter();
  double h = perim > 0.0 ? perim / double(n) : 1.0;

  std::vector<Vec2> d(n), s(n), unit(n);
  double s1 = 0.0, s2 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    d[i] = c.points[i] - c.points[(i + n - 1) % n];
    s[i] = c.points[(i + 1) % n] - 2.0 * c.points[i] + c.points[(i + n - 1) % n];
    s1 += d[i].norm2();
    s2 += s[i].norm2();
    double len = d[i].norm();
    unit[i] = len > 0.0 ? (1.0 / len) * d[i] : Vec2{};
  }

  // dE/dh for E = alpha*S1/(2h) + beta*S2/(2h^3); h itself moves with the
  // perimeter (dh/dv_k = (u_k - u_{k+1})/N), which the pentadiagonal
  // stencils alone do not capture.
  double dE_dh = -(alpha * s1) / (2.0 * h * h) - (3.0 * beta * s2) / (2.0 * h * h * h * h);
  bool h_varies = perim > 0.0;

  std::vector<Vec2> grad(n);
  for (size_t i = 0; i < n; ++i) {
    Vec2 g = (alpha / h) * (d[i] - d[(i + 1) % n]);
    g = g + (beta / (h * h * h)) * (s[(i + n - 1) % n] - 2.0 * s[i] + s[(i + 1) % n]);
    if (h_varies) {
      Vec2 dh = (1.0 / double(n)) * (unit[i] - unit[(i + 1) % n]);
      g = g + dE_dh * dh;
    }
    grad[i] = g;
  }
  return grad;
}

double contour_image_energy(const Contour& c, const ScalarField& field) {
  check_contour(c);
  double h = param_step(c);
  double acc = 0.0;
  for (const Vec2& p : c.points) acc += bilinear_sample(field, p.x, p.y);
  return acc * h;
}

double total_energy(const Contour& c, const ScalarField& field, const SnakeParams& params,
                    const ScalarField* external) {
  double e = internal_energy(c, params.alpha, params.beta) + contour_image_energy(c, field);
  if (external) e += contour_image_energy(c, *external);
  return e;
}

namespace {

// Factored (gamma*I + A) for fixed node count and parameter step. A is the
// cyclic pentadiagonal operator of the internal energy: for each i the
// elastic stencil (-1, 2, -1)*alpha/h and the bending stencil
// (1, -4, 6, -4, 1)*beta/h^3, accumulated modulo N so small N wrap
// correctly.
class SemiImplicitSolver {
public:
  SemiImplicitSolver(int n, double h, double alpha, double beta, double gamma) : n_(n) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    h = std::max(h, 1e-3);  // keep 1/h^3 finite when a contour degenerates
    double ka = alpha / h;
    double kb = beta / (h * h * h);
    for (int i = 0; i < n; ++i) {
      int im1 = (i + n - 1) % n, ip1 = (i + 1) % n;
      int im2 = (i + n - 2) % n, ip2 = (i + 2) % n;
      m(i, i) += 2.0 * ka + 6.0 * kb + gamma;
      m(i, im1) += -ka - 4.0 * kb;
      m(i, ip1) += -ka - 4.0 * kb;
      m(i, im2) += kb;
      m(i, ip2) += kb;
    }
    ldlt_.compute(m);
    assert(ldlt_.info() == Eigen::Success);
  }

  // rhs and result are n x 2 (x and y coordinate columns).
  Eigen::MatrixX2d solve(const Eigen::MatrixX2d& rhs) const { return ldlt_.solve(rhs); }

  int size() const { return n_; }

private:
  int n_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

Contour apply_step(const Contour& c, const VectorField& force, const SnakeParams& params,
                   const SemiImplicitSolver& solver) {
  int n = int(c.points.size());
  Eigen::MatrixX2d rhs(n, 2);
  for (int i = 0; i < n; ++i) {
    Vec2 p = c.points[size_t(i)];
    Vec2 f = bilinear_sample(force, p.x, p.y);
    rhs(i, 0) = params.gamma * p.x + f.x;
    rhs(i, 1) = params.gamma * p.y + f.y;
  }
  Eigen::MatrixX2d sol = solver.solve(rhs);
  Contour out;
  out.points.resize(size_t(n));
  double xmax = double(force.width - 1), ymax = double(force.height - 1);
  for (int i = 0; i < n; ++i) {
    out.points[size_t(i)] = {std::clamp(sol(i, 0), 0.0, xmax),
                             std::clamp(sol(i, 1), 0.0, ymax)};
  }
  return out;
}

}  // namespace

Contour evolve_step(const Contour& c, const VectorField& force, const SnakeParams& params) {
  check_contour(c);
  params.validate();
  SemiImplicitSolver solver(int(c.points.size()), param_step(c), params.alpha, params.beta,
                            params.gamma);
  return apply_step(c, force, params, solver);
}

Contour resample(const Contour& c, double spacing) {
  check_contour(c);
  if (!(spacing >= 1.0)) throw ConfigError("resample: spacing must be >= 1");
  double perim = c.perimeter();
  if (perim <= 0.0) throw DataError("resample: zero-perimeter contour");

  size_t n = c.points.size();
  size_t m = size_t(std::max<long>(4, std::lround(perim / spacing)));
  double step = perim / double(m);

  Contour out;
  out.points.reserve(m);
  size_t edge = 0;  // edge from points[edge] to points[edge+1]
  double edge_start = 0.0;
  double edge_len = (c.points[1 % n] - c.points[0]).norm();
  for (size_t k = 0; k < m; ++k) {
    double target = double(k) * step;
    while (target > edge_start + edge_len && edge + 1 < n) {
      edge_start += edge_len;
      ++edge;
      edge_len = (c.points[(edge + 1) % n] - c.points[edge]).norm();
    }
    double t = edge_len > 0.0 ? (target - edge_start) / edge_len : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    Vec2 a = c.points[edge];
    Vec2 b = c.points[(edge + 1) % n];
    out.points.push_back(a + t * (b - a));
  }
  return out;
}

EvolutionReport evolve(const Contour& c, const ScalarField& field, const SnakeParams& params,
                       const ScalarField* external) {
  check_contour(c);
  params.validate();

  ScalarField combined = field;
  if (external) {
    if (external->width != field.width || external->height != field.height)
      throw DataError("evolve: external field dimensions mismatch");
    for (size_t i = 0; i < combined.values.size(); ++i)
      combined.values[i] += external->values[i];
  }
  VectorField grad_field = gradient(combined);
  VectorField force(combined.width, combined.height);
  for (size_t i = 0; i < force.gx.size(); ++i) {
    force.gx[i] = -grad_field.gx[i];
    force.gy[i] = -grad_field.gy[i];
  }

  EvolutionReport report;
  report.contour = c;
  SemiImplicitSolver solver(int(c.points.size()), param_step(c), params.alpha, params.beta,
                            params.gamma);

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    Contour next = apply_step(report.contour, force, params, solver);
    double max_disp = 0.0;
    for (size_t i = 0; i < next.points.size(); ++i) {
      Vec2 d = next.points[i] - report.contour.points[i];
      max_disp = std::max(max_disp, std::max(std::abs(d.x), std::abs(d.y)));
    }
    report.contour = std::move(next);
    report.iterations = iter;
    report.energy_history.push_back(total_energy(report.contour, field, params, external));
    if (max_disp < params.move_tol) {
      report.converged = true;
      break;
    }
    if (iter % params.resample_every == 0) {
      report.contour = resample(report.contour, params.resample_spacing);
      solver = SemiImplicitSolver(int(report.contour.points.size()), param_step(report.contour),
                                  params.alpha, params.beta, params.gamma);
    }
  }
  return report;
}

std::string contour_to_text(int id, const Contour& c) {
  std::string line = std::to_string(id) + ", " + std::to_string(c.points.size());
  char buf[64];
  for (const Vec2& p : c.points) {
    std::snprintf(buf, sizeof buf, ", %.6f, %.6f", p.x, p.y);
    line += buf;
  }
  return line;
}

Contour contour_from_text(const std::string& line, int* id_out) {
  std::istringstream in(line);
  std::string tok;
  auto next = [&]() -> double {
    if (!std::getline(in, tok, ',')) throw DataError("contour text line truncated");
    return std::stod(tok);
  };
  int id = int(next());
  size_t n = size_t(next());
  Contour c;
  c.points.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    double x = next();
    double y = next();
    c.points.push_back({x, y});
  }
  if (id_out) *id_out = id;
  return c;
}

}  // namespace topotrack
