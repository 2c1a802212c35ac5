#include <doctest.h>

#include <cmath>

#include "sulab/energy.hpp"
#include "sulab/field.hpp"
#include "sulab/oracles.hpp"

using namespace sulab;

TEST_CASE("bubble map hits the poles and stays on the sphere") {
  BubbleMap b;
  b.lambda = 0.5;
  b.center = {0.2, -0.1};
  CHECK(dist(b(b.center), {0.0, 0.0, -1.0}) < 1e-15);
  Vec3 far = b({b.center[0] + 1e4, b.center[1]});
  CHECK(far[2] > 0.999);
  for (double x : {-1.0, 0.3, 2.0})
    for (double y : {-0.7, 0.0, 1.3}) {
      CHECK(std::abs(norm(b({x, y})) - 1.0) < 1e-14);
    }
}

TEST_CASE("bubble density closed form matches finite differences") {
  BubbleMap b;
  b.lambda = 0.3;
  const double h = 1e-5;
  for (Vec2 xy : {Vec2{0.1, 0.2}, Vec2{-0.4, 0.05}, Vec2{1.0, -1.0}}) {
    Vec3 ux = (1.0 / (2.0 * h)) * (b({xy[0] + h, xy[1]}) - b({xy[0] - h, xy[1]}));
    Vec3 uy = (1.0 / (2.0 * h)) * (b({xy[0], xy[1] + h}) - b({xy[0], xy[1] - h}));
    double d_fd = norm2(ux) + norm2(uy);
    CHECK(d_fd == doctest::Approx(b.density(xy)).epsilon(1e-7));
  }
  // max gradient sits at the center: |grad u| = 2 sqrt(2) / lambda
  double gmax = std::sqrt(b.density({0.0, 0.0}));
  CHECK(gmax == doctest::Approx(2.0 * std::sqrt(2.0) / b.lambda).epsilon(1e-14));
}

TEST_CASE("bubble disk energies take the closed form") {
  CHECK(BubbleMap::disk_energy(1.0, 1.0) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(BubbleMap::disk_energy(8.0, 1.0) ==
        doctest::Approx(8.0 * kPi * 64.0 / 65.0).epsilon(1e-14));
  CHECK(BubbleMap::total_energy(1) == doctest::Approx(8.0 * kPi).epsilon(1e-15));
  CHECK(BubbleMap::total_energy(3) == doctest::Approx(24.0 * kPi).epsilon(1e-15));
  // quadrature over the plane reproduces the total
  BubbleMap b;
  double q = integrate_plane(
      [&](double r, double th) {
        return b.density({r * std::cos(th), r * std::sin(th)});
      },
      1e-9);
  CHECK(q == doctest::Approx(8.0 * kPi).epsilon(1e-7));
}

TEST_CASE("equator map energy matches 2 pi log(b/a)") {
  EquatorMap e;
  CHECK(std::abs(norm(e({0.3, 0.4})) - 1.0) < 1e-15);
  CHECK(EquatorMap::annulus_energy(0.25, 1.0) ==
        doctest::Approx(2.0 * kPi * std::log(4.0)).epsilon(1e-15));
  double q = integrate_annulus([](double r, double) { return 1.0 / (r * r); }, 0.25,
                               1.0, 1e-10);
  CHECK(q == doctest::Approx(2.0 * kPi * std::log(4.0)).epsilon(1e-8));
  // frozen decimal guard for the headline annulus value
  CHECK(EquatorMap::annulus_energy(0.25, 1.0) ==
        doctest::Approx(8.710344361214409).epsilon(1e-13));
}

TEST_CASE("log neck map runs along a geodesic through the base point") {
  UnitSphere S;
  LogNeckMap m;
  m.N = &S;
  m.y = {0.0, 0.0, 1.0};
  m.a = {0.0, 0.2, 0.0};
  m.r_ref = 0.1;
  CHECK(dist(m(0.1, 0.0), m.y) < 1e-14);
  Vec3 p = m(0.4, 1.0);  // theta independent
  CHECK(dist(p, m(0.4, 2.5)) < 1e-15);
  CHECK(std::abs(norm(p) - 1.0) < 1e-12);
  // arc distance from y equals |a| ln(r/r_ref)
  double want = 0.2 * std::log(4.0);
  CHECK(std::acos(dot(p, m.y)) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("synthetic family respects the constraint and the band window") {
  SyntheticFamilyParams p;
  p.alpha = 1.05;
  p.lambda = 0.01;
  p.t1 = 0.9;
  p.t2 = 0.1;
  p.degree = 1;
  p.has_body_value = false;
  PolarGrid g = build_polar_grid({0.0, 0.0}, p.lambda / 32.0, 2.0, 192, 64);
  MapField u = synthetic_neck_family(p, g);
  UnitSphere S;
  CHECK(constraint_violation(u, S) < 1e-12);

  // below the band no rotation has accumulated: raw bubble values
  BubbleMap b{p.lambda, {0.0, 0.0}, p.degree};
  int i0 = 1;
  for (int j = 0; j < g.n_theta; j += 7) {
    Vec2 xy = g.position(i0, j);
    CHECK(dist(u.at(g.index(i0, j)), b(xy)) < 1e-12);
  }

  // beyond the band the map is an isometric copy of the bubble tail, which
  // is within O((lambda/r)^2) of a constant
  Vec3 outer = u.at(g.index(g.n_r, 0));
  CHECK(dist(outer, u.at(g.index(g.n_r, g.n_theta / 3))) < 1e-9);
}

TEST_CASE("synthetic family aligns the body to the requested value") {
  SyntheticFamilyParams p;
  p.alpha = 1.1;
  p.lambda = 0.01;
  p.t1 = 0.9;
  p.t2 = 0.1;
  p.has_body_value = true;
  p.body_value = {0.0, 0.0, 1.0};
  PolarGrid g = build_polar_grid({0.0, 0.0}, p.lambda / 32.0, 2.0, 192, 64);
  MapField u = synthetic_neck_family(p, g);
  Vec3 outer = u.at(g.index(g.n_r, 5));
  CHECK(dist(outer, {0.0, 0.0, 1.0}) < 1e-4);
}

TEST_CASE("synthetic family rejects bad bands and grids") {
  SyntheticFamilyParams p;
  p.lambda = 0.01;
  PolarGrid g = build_polar_grid({0.0, 0.0}, p.lambda / 32.0, 2.0, 96, 32);
  SyntheticFamilyParams narrow = p;
  narrow.t1 = 0.5;
  narrow.t2 = 0.49;
  CHECK_THROWS_AS(synthetic_neck_family(narrow, g), BandTooNarrow);
  SyntheticFamilyParams offgrid = p;
  offgrid.t1 = 0.9;
  offgrid.t2 = 0.1;
  PolarGrid small = build_polar_grid({0.0, 0.0}, 0.05, 0.5, 32, 32);
  CHECK_THROWS_AS(synthetic_neck_family(offgrid, small), BandOutOfRange);
  SyntheticFamilyParams badDir = p;
  badDir.t1 = 0.9;
  badDir.t2 = 0.1;
  badDir.a_dir = {0.0, 0.0, 1.0};  // no tangent component at the pole
  CHECK_THROWS_AS(synthetic_neck_family(badDir, g), Error);
}

TEST_CASE("plane and annulus integrators handle smooth profiles") {
  // gaussian: integral over the plane is pi
  double q = integrate_plane(
      [](double r, double) { return std::exp(-r * r); }, 1e-9);
  CHECK(q == doctest::Approx(kPi).epsilon(1e-8));
  // theta-dependent integrand over an annulus
  double a = integrate_annulus(
      [](double r, double th) { return (1.0 + 0.5 * std::cos(th)) / (r * r); }, 0.5,
      2.0, 1e-9);
  CHECK(a == doctest::Approx(2.0 * kPi * std::log(4.0)).epsilon(1e-7));
  CHECK_THROWS_AS(integrate_annulus([](double, double) { return 1.0; }, -1.0, 2.0,
                                    1e-6),
                  BadRadii);
}
