// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "topotrack/errors.hpp"
#include "topotrack/snake.hpp"

using namespace topotrack;
using testutil::random_contour;
using testutil::regular_polygon;

namespace {

// Independent per-node oracle for the internal energy: assembles the v_s and
// v_ss difference arrays explicitly instead of accumulating inline.
double internal_energy_oracle(const Contour& c, double alpha, double beta) {
  size_t n = c.points.size();
  double perim = 0.0;
  for (size_t i = 0; i < n; ++i) perim += (c.points[(i + 1) % n] - c.points[i]).norm();
  double h = perim > 0.0 ? perim / double(n) : 1.0;
  std::vector<Vec2> vs(n), vss(n);
  for (size_t i = 0; i < n; ++i) {
    vs[i] = c.points[i] - c.points[(i + n - 1) % n];
    vss[i] = c.points[(i + 1) % n] - 2.0 * c.points[i] + c.points[(i + n - 1) % n];
  }
  double total = 0.0;
  for (size_t i = 0; i < n; ++i)
    total += (alpha * vs[i].norm2() / (h * h) + beta * vss[i].norm2() / (h * h * h * h)) * h / 2.0;
  return total;
}

std::vector<Vec2> finite_difference_gradient(const Contour& c, double alpha, double beta,
                                             double step = 1e-5) {
  std::vector<Vec2> g(c.points.size());
  Contour work = c;
  for (size_t i = 0; i < c.points.size(); ++i) {
    work.points[i].x = c.points[i].x + step;
    double ep = internal_energy(work, alpha, beta);
    work.points[i].x = c.points[i].x - step;
    double em = internal_energy(work, alpha, beta);
    work.points[i].x = c.points[i].x;
    g[i].x = (ep - em) / (2.0 * step);

    work.points[i].y = c.points[i].y + step;
    ep = internal_energy(work, alpha, beta);
    work.points[i].y = c.points[i].y - step;
    em = internal_energy(work, alpha, beta);
    work.points[i].y = c.points[i].y;
    g[i].y = (ep - em) / (2.0 * step);
  }
  return g;
}

Contour unit_square() {
  Contour c;
  c.points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  return c;
}

ScalarField zero_field(int w, int h) { return ScalarField(w, h, 0.0); }

VectorField zero_force(int w, int h) { return VectorField(w, h); }

}  // namespace

TEST_SUITE_BEGIN("snake");

TEST_CASE("internal_energy on canonical contours") {
  SUBCASE("coincident nodes give zero energy") {
    Contour c;
    c.points = {{3, 3}, {3, 3}, {3, 3}, {3, 3}};
    CHECK(internal_energy(c, 1.0, 1.0) == 0.0);
  }
  SUBCASE("unit square, alpha=1 beta=0: energy 2.0") {
    // Perimeter 4, h = 1, each |v_s|^2 = 1: 0.5 * 4 * 1 * 1 = 2.
    CHECK(internal_energy(unit_square(), 1.0, 0.0) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("matches the independent per-node summation oracle") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      Contour c = random_contour(rng);
      double a = 0.7, b = 1.3;
      CHECK(internal_energy(c, a, b) ==
            doctest::Approx(internal_energy_oracle(c, a, b)).epsilon(1e-12));
    }
  }
  SUBCASE("closed regular polygon with beta only matches the oracle") {
    Contour c = regular_polygon(12, {50, 50}, 10.0);
    CHECK(internal_energy(c, 0.0, 1.0) ==
          doctest::Approx(internal_energy_oracle(c, 0.0, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("internal_energy invariances") {
  std::mt19937_64 rng(23);
  SUBCASE("rigid translation (exact for exactly representable shifts)") {
    Contour c;
    std::uniform_real_distribution<double> d(0.0, 100.0);
    for (int i = 0; i < 16; ++i)
      c.points.push_back({std::round(d(rng) * 2.0) / 2.0, std::round(d(rng) * 2.0) / 2.0});
    Contour shifted = c;
    for (Vec2& p : shifted.points) p = p + Vec2{128.0, -256.0};
    CHECK(internal_energy(c, 0.4, 0.9) == internal_energy(shifted, 0.4, 0.9));
  }
  SUBCASE("cyclic relabeling of nodes") {
    for (int trial = 0; trial < 10; ++trial) {
      Contour c = random_contour(rng);
      Contour rot = c;
      std::rotate(rot.points.begin(), rot.points.begin() + 3, rot.points.end());
      double e1 = internal_energy(c, 0.5, 0.8);
      double e2 = internal_energy(rot, 0.5, 0.8);
      CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));
    }
  }
  SUBCASE("non-negative, zero only for vanishing differences") {
    for (int trial = 0; trial < 20; ++trial) {
      Contour c = random_contour(rng);
      CHECK(internal_energy(c, 0.3, 0.7) >= 0.0);
    }
  }
}

TEST_CASE("internal_energy_gradient matches central finite differences") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    Contour c = random_contour(rng);
    double alpha = 0.1 + 0.9 * double(trial % 5) / 4.0;
    double beta = 0.05 + 0.5 * double(trial % 7) / 6.0;
    auto analytic = internal_energy_gradient(c, alpha, beta);
    auto fd = finite_difference_gradient(c, alpha, beta);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < analytic.size(); ++i) {
      num += (analytic[i] - fd[i]).norm2();
      den += fd[i].norm2();
    }
    REQUIRE(den > 0.0);
    CHECK(std::sqrt(num / den) <= 1e-4);
  }
}

TEST_CASE("internal_energy_gradient symmetry cases") {
  SUBCASE("regular polygon with beta=0: gradient is radial with equal magnitudes") {
    Contour c = regular_polygon(16, {40, 40}, 12.0);
    auto g = internal_energy_gradient(c, 1.0, 0.0);
    double mag0 = g[0].norm();
    CHECK(mag0 > 0.0);
    for (size_t i = 0; i < g.size(); ++i) {
      Vec2 radial = c.points[i] - Vec2{40, 40};
      Vec2 unit = (1.0 / radial.norm()) * radial;
      // Fully radial: the projection carries the entire magnitude.
      CHECK(std::abs(g[i].dot(unit)) == doctest::Approx(g[i].norm()).epsilon(1e-9));
      CHECK(g[i].norm() == doctest::Approx(mag0).epsilon(1e-9));
    }
  }
  SUBCASE("all nodes coincident: zero gradient") {
    Contour c;
    c.points = {{5, 5}, {5, 5}, {5, 5}, {5, 5}};
    for (Vec2 g : internal_energy_gradient(c, 1.0, 1.0)) {
      CHECK(g.x == 0.0);
      CHECK(g.y == 0.0);
    }
  }
}

TEST_CASE("contour_image_energy line integral") {
  SUBCASE("zero field integrates to zero") {
    CHECK(contour_image_energy(unit_square(), zero_field(4, 4)) == 0.0);
  }
  SUBCASE("constant field k integrates to k * perimeter") {
    ScalarField f(8, 8, 2.5);
    Contour c = regular_polygon(10, {3.5, 3.5}, 2.0);
    CHECK(contour_image_energy(c, f) ==
          doctest::Approx(2.5 * c.perimeter()).epsilon(1e-9));
  }
  SUBCASE("matches independent node-by-node sampling") {
    ScalarField f(6, 6);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& v : f.values) v = d(rng);
    Contour c;
    c.points = {{1.2, 1.7}, {4.1, 1.3}, {4.4, 4.2}, {1.1, 3.9}};
    double h = c.perimeter() / 4.0;
    double expected = 0.0;
    for (const Vec2& p : c.points) expected += bilinear_sample(f, p.x, p.y) * h;
    CHECK(contour_image_energy(c, f) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("total_energy is the sum of its parts") {
  SnakeParams params;
  params.alpha = 1.0;
  params.beta = 0.5;
  ScalarField f(8, 8);
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : f.values) v = d(rng);
  ScalarField ext(8, 8);
  for (double& v : ext.values) v = d(rng);
  Contour c = regular_polygon(8, {3.5, 3.5}, 2.5);

  SUBCASE("alpha=beta=0 and zero fields: zero total") {
    SnakeParams p0 = params;
    p0.alpha = 0.0;
    p0.beta = 0.0;
    CHECK(total_energy(c, zero_field(8, 8), p0) == 0.0);
  }
  SUBCASE("zero fields leave only the internal term") {
    CHECK(total_energy(c, zero_field(8, 8), params) ==
          doctest::Approx(internal_energy(c, params.alpha, params.beta)));
  }
  SUBCASE("all terms combine additively") {
    double expected = internal_energy(c, params.alpha, params.beta) +
                      contour_image_energy(c, f) + contour_image_energy(c, ext);
    CHECK(total_energy(c, f, params, &ext) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("evolve_step identity and shrinkage") {
  SUBCASE("alpha=beta=0 with zero force leaves the contour unchanged") {
    SnakeParams p;
    p.alpha = 0.0;
    p.beta = 0.0;
    p.gamma = 1.0;
    Contour c = regular_polygon(12, {10, 10}, 5.0);
    Contour out = evolve_step(c, zero_force(21, 21), p);
    for (size_t i = 0; i < c.points.size(); ++i) {
      CHECK(out.points[i].x == doctest::Approx(c.points[i].x).epsilon(1e-12));
      CHECK(out.points[i].y == doctest::Approx(c.points[i].y).epsilon(1e-12));
    }
  }
  SUBCASE("circle with elasticity and zero force strictly shrinks") {
    SnakeParams p;
    p.alpha = 1.0;
    p.beta = 0.0;
    Contour c = regular_polygon(24, {30, 30}, 15.0);
    Contour prev = c;
    for (int step = 0; step < 5; ++step) {
      Contour next = evolve_step(prev, zero_force(61, 61), p);
      for (size_t i = 0; i < next.points.size(); ++i) {
        double r_prev = (prev.points[i] - Vec2{30, 30}).norm();
        double r_next = (next.points[i] - Vec2{30, 30}).norm();
        CHECK(r_next < r_prev);
      }
      prev = next;
    }
  }
  SUBCASE("internal energy is non-increasing over 100 steps with zero force") {
    std::mt19937_64 rng(41);
    Contour c = random_contour(rng, 12, 32);
    SnakeParams p;
    p.alpha = 0.1;
    p.beta = 0.4;
    double prev_energy = internal_energy(c, p.alpha, p.beta);
    for (int step = 0; step < 100; ++step) {
      c = evolve_step(c, zero_force(101, 101), p);
      double e = internal_energy(c, p.alpha, p.beta);
      CHECK(e <= prev_energy + 1e-9);
      prev_energy = e;
    }
  }
}

TEST_CASE("evolve_step clamps nodes to the field rectangle") {
  SnakeParams p;
  p.alpha = 0.0;
  p.beta = 0.0;
  VectorField push(16, 16);
  for (double& v : push.gx) v = 100.0;  // hard shove toward +x
  Contour c = regular_polygon(8, {8, 8}, 4.0);
  Contour out = evolve_step(c, push, p);
  for (const Vec2& q : out.points) {
    CHECK(q.x <= 15.0);
    CHECK(q.x >= 0.0);
    CHECK(q.y <= 15.0);
    CHECK(q.y >= 0.0);
  }
}

TEST_CASE("resample node placement") {
  SUBCASE("square of perimeter 40 at spacing 10 gives the 4 corners") {
    Contour c;
    c.points = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
    Contour out = resample(c, 10.0);
    REQUIRE(out.points.size() == 4);
    CHECK(out.points[0].x == doctest::Approx(0.0));
    CHECK(out.points[0].y == doctest::Approx(0.0));
    CHECK(out.points[1].x == doctest::Approx(10.0));
    CHECK(out.points[1].y == doctest::Approx(0.0));
    CHECK(out.points[2].x == doctest::Approx(10.0));
    CHECK(out.points[2].y == doctest::Approx(10.0));
    CHECK(out.points[3].x == doctest::Approx(0.0));
    CHECK(out.points[3].y == doctest::Approx(10.0));
  }
  SUBCASE("spacing >= perimeter/4 yields exactly 4 nodes") {
    Contour c = regular_polygon(20, {5, 5}, 3.0);
    Contour out = resample(c, c.perimeter());
    CHECK(out.points.size() == 4);
  }
  SUBCASE("node count follows max(4, round(perimeter/spacing))") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
      Contour c = random_contour(rng, 8, 40);
      double spacing = 1.0 + double(trial);
      Contour out = resample(c, spacing);
      auto expected = size_t(std::max<long>(4, std::lround(c.perimeter() / spacing)));
      CHECK(out.points.size() == expected);
    }
  }
  SUBCASE("perimeter is preserved within one spacing unit") {
    Contour c = regular_polygon(40, {50, 50}, 20.0);
    Contour out = resample(c, 3.0);
    CHECK(std::abs(out.perimeter() - c.perimeter()) < 3.0);
  }
  SUBCASE("zero-perimeter contour rejected") {
    Contour c;
    c.points = {{1, 1}, {1, 1}, {1, 1}, {1, 1}};
    CHECK_THROWS_AS(resample(c, 2.0), DataError);
  }
}

TEST_CASE("evolve bookkeeping and convergence") {
  SUBCASE("already at a minimum with zero force: converges in one iteration") {
    SnakeParams p;
    p.alpha = 0.0;
    p.beta = 0.0;
    p.move_tol = 0.05;
    Contour c = regular_polygon(8, {8, 8}, 4.0);
    EvolutionReport r = evolve(c, zero_field(17, 17), p);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    REQUIRE(r.energy_history.size() == 1);
    for (size_t i = 0; i < c.points.size(); ++i) {
      CHECK(r.contour.points[i].x == doctest::Approx(c.points[i].x).epsilon(1e-12));
    }
  }
  SUBCASE("max_iterations=3 on a non-converged problem: 3 energy entries, not converged") {
    SnakeParams p;
    p.alpha = 1.0;
    p.beta = 0.0;
    p.max_iterations = 3;
    p.move_tol = 1e-9;
    Contour c = regular_polygon(24, {30, 30}, 20.0);
    EvolutionReport r = evolve(c, zero_field(61, 61), p);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.energy_history.size() == 3);
  }
  SUBCASE("high-contrast disk edge map: converges near the true circle") {
    GrayImage img = testutil::disk_image(64, 64, {32, 32}, 20.0, 0.1, 0.7);
    ScalarField field = image_energy(img, 0.0, 10.0, 0.0, 1.0);
    SnakeParams p;
    p.alpha = 0.4;
    p.beta = 0.5;
    p.gamma = 1.0;
    p.max_iterations = 500;
    p.move_tol = 0.02;
    Contour seed = regular_polygon(64, {32, 32}, 25.0);
    EvolutionReport r = evolve(seed, field, p);
    double rms = 0.0;
    for (const Vec2& q : r.contour.points) {
      double err = (q - Vec2{32, 32}).norm() - 20.0;
      rms += err * err;
    }
    rms = std::sqrt(rms / double(r.contour.points.size()));
    CHECK(rms <= 1.0);
  }
}

TEST_CASE("evolve keeps every node inside the image rectangle") {
  GrayImage img = testutil::disk_image(32, 32, {16, 16}, 10.0, 0.2, 0.8);
  ScalarField field = image_energy(img, 1.0, 2.0, 0.0, 1.0);
  SnakeParams p;
  p.alpha = 0.5;
  p.beta = 0.2;
  p.max_iterations = 60;
  Contour seed = regular_polygon(24, {16, 16}, 14.0);
  EvolutionReport r = evolve(seed, field, p);
  for (const Vec2& q : r.contour.points) {
    CHECK(q.x >= 0.0);
    CHECK(q.x <= 31.0);
    CHECK(q.y >= 0.0);
    CHECK(q.y <= 31.0);
  }
}

TEST_CASE("scaling weights and stiffness together preserves the iterate sequence") {
  // Multiplying (w_line, w_edge, w_term, alpha, beta, gamma) by c scales the
  // total energy by c and leaves each semi-implicit iterate unchanged.
  GrayImage img = testutil::disk_image(48, 48, {24, 24}, 12.0, 0.2, 0.8);
  double c = 3.0;
  SnakeParams p1;
  p1.alpha = 0.2;
  p1.beta = 0.3;
  p1.gamma = 1.0;
  p1.w_edge = 2.0;
  p1.w_line = 0.1;
  p1.max_iterations = 40;
  p1.move_tol = 1e-7;
  SnakeParams p2 = p1;
  p2.alpha *= c;
  p2.beta *= c;
  p2.gamma *= c;
  p2.w_edge *= c;
  p2.w_line *= c;

  ScalarField f1 = image_energy(img, p1.w_line, p1.w_edge, p1.w_term, 1.0);
  ScalarField f2 = image_energy(img, p2.w_line, p2.w_edge, p2.w_term, 1.0);
  // The combined field itself scales by exactly c.
  Contour probe = regular_polygon(16, {24, 24}, 14.0);
  CHECK(contour_image_energy(probe, f2) ==
        doctest::Approx(c * contour_image_energy(probe, f1)).epsilon(1e-12));

  EvolutionReport r1 = evolve(probe, f1, p1);
  EvolutionReport r2 = evolve(probe, f2, p2);
  REQUIRE(r1.iterations == r2.iterations);
  REQUIRE(r1.contour.points.size() == r2.contour.points.size());
  for (size_t i = 0; i < r1.contour.points.size(); ++i) {
    CHECK(r1.contour.points[i].x == doctest::Approx(r2.contour.points[i].x).epsilon(1e-9));
    CHECK(r1.contour.points[i].y == doctest::Approx(r2.contour.points[i].y).epsilon(1e-9));
  }
}

TEST_CASE("contour text serialization round trip") {
  Contour c;
  c.points = {{1.25, 2.5}, {3.125, 4.0}, {5.0, 6.75}, {0.5, 1.0}};
  std::string line = contour_to_text(7, c);
  CHECK(line.substr(0, 5) == "7, 4,");
  int id = 0;
  Contour back = contour_from_text(line, &id);
  CHECK(id == 7);
  REQUIRE(back.points.size() == 4);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(back.points[i].x == doctest::Approx(c.points[i].x).epsilon(1e-6));
    CHECK(back.points[i].y == doctest::Approx(c.points[i].y).epsilon(1e-6));
  }
}

TEST_SUITE_END();
