#include <doctest.h>

#include <cmath>
#include <random>

#include "sulab/manifold.hpp"

using namespace sulab;

namespace {
std::mt19937 rng_for(int seed) { return std::mt19937(seed); }

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> g;
  Vec3 v{g(rng), g(rng), g(rng)};
  return normalized(v);
}
}  // namespace

TEST_CASE("sphere projection normalizes and rejects the origin") {
  UnitSphere S;
  auto rng = rng_for(11);
  for (int k = 0; k < 50; ++k) {
    Vec3 p = 3.0 * random_unit(rng);
    Vec3 q = S.project(p);
    CHECK(std::abs(norm(q) - 1.0) < 1e-14);
    CHECK(dist(q, normalized(p)) < 1e-14);
  }
  CHECK_THROWS_AS(S.project({0.0, 0.0, 0.0}), PointOutsideTubularNeighborhood);
}

TEST_CASE("sphere second fundamental form matches -<X,Y> p") {
  UnitSphere S;
  auto rng = rng_for(12);
  for (int k = 0; k < 20; ++k) {
    Vec3 p = random_unit(rng);
    Vec3 X = S.tangent_project(p, random_unit(rng));
    Vec3 Y = S.tangent_project(p, random_unit(rng));
    Vec3 A = S.sff(p, X, Y);
    CHECK(dist(A, -dot(X, Y) * p) < 1e-13);
    // X with a normal component added gives the same value
    Vec3 A2 = S.sff(p, X + 0.7 * p, Y);
    CHECK(dist(A, A2) < 1e-13);
  }
}

TEST_CASE("sphere exponential traces great circles") {
  UnitSphere S;
  Vec3 p{1.0, 0.0, 0.0};
  Vec3 v{0.0, 0.0, kPi / 2.0};
  Vec3 q = S.exp(p, v);
  CHECK(dist(q, {0.0, 0.0, 1.0}) < 1e-14);
  CHECK(dist(S.exp(p, {0.0, 0.0, 0.0}), p) < 1e-15);
  // generic direction: closed form cos|v| p + sin|v| v/|v|
  auto rng = rng_for(13);
  for (int k = 0; k < 20; ++k) {
    Vec3 b = random_unit(rng);
    Vec3 w = S.tangent_project(b, random_unit(rng));
    double s = norm(w);
    Vec3 expect = std::cos(s) * b + (std::sin(s) / s) * w;
    CHECK(dist(S.exp(b, w), expect) < 1e-13);
  }
}

TEST_CASE("ellipsoid projection lands on the level set and is locally nearest") {
  Ellipsoid E({1.5, 1.0, 0.7});
  const Vec3 m{1.0 / (1.5 * 1.5), 1.0, 1.0 / (0.7 * 0.7)};
  auto level = [&](const Vec3& q) {
    return m[0] * q[0] * q[0] + m[1] * q[1] * q[1] + m[2] * q[2] * q[2];
  };
  auto rng = rng_for(14);
  std::uniform_real_distribution<double> amp(0.8, 2.5);
  for (int k = 0; k < 50; ++k) {
    Vec3 p = amp(rng) * random_unit(rng);
    Vec3 q = E.project(p);
    CHECK(std::abs(level(q) - 1.0) < 1e-10);
    // p - q is parallel to the normal at q
    Vec3 d = p - q;
    if (norm(d) > 1e-9) {
      Vec3 n = E.unit_normal(q);
      CHECK(norm(cross(d, n)) / norm(d) < 1e-6);
    }
  }
  // points already on the surface stay put
  Vec3 on{1.5, 0.0, 0.0};
  CHECK(dist(E.project(on), on) < 1e-12);
}

TEST_CASE("ellipsoid second fundamental form matches the level-set formula") {
  // For g = sum m_i x_i^2 the normal curvature is -(X^T Hess g X)/|grad g|,
  // i.e. A(X,X) = -(2 sum m_i X_i^2 / |grad g|) n.
  Ellipsoid E({1.5, 1.0, 0.7});
  const Vec3 m{1.0 / (1.5 * 1.5), 1.0, 1.0 / (0.7 * 0.7)};
  auto rng = rng_for(15);
  for (int k = 0; k < 20; ++k) {
    Vec3 p = E.project(2.0 * random_unit(rng));
    Vec3 X = E.tangent_project(p, random_unit(rng));
    if (norm(X) < 0.1) continue;
    Vec3 g{2.0 * m[0] * p[0], 2.0 * m[1] * p[1], 2.0 * m[2] * p[2]};
    double quad = 2.0 * (m[0] * X[0] * X[0] + m[1] * X[1] * X[1] + m[2] * X[2] * X[2]);
    Vec3 expect = (-quad / norm(g)) * E.unit_normal(p);
    Vec3 got = E.sff(p, X, X);
    CHECK(dist(got, expect) < 1e-4 * (1.0 + norm(expect)));
  }
}

TEST_CASE("ellipsoid sff is symmetric and normal-valued") {
  Ellipsoid E({1.3, 1.0, 0.8});
  auto rng = rng_for(16);
  for (int k = 0; k < 10; ++k) {
    Vec3 p = E.project(random_unit(rng));
    Vec3 X = E.tangent_project(p, random_unit(rng));
    Vec3 Y = E.tangent_project(p, random_unit(rng));
    Vec3 axy = E.sff(p, X, Y);
    Vec3 ayx = E.sff(p, Y, X);
    CHECK(dist(axy, ayx) < 1e-6);
    Vec3 n = E.unit_normal(p);
    CHECK(norm(axy - dot(axy, n) * n) < 1e-10);
  }
}

TEST_CASE("ellipsoid exponential stays on the surface and respects symmetry") {
  Ellipsoid E({1.5, 1.0, 0.7});
  // the x-z cross-section ellipse is totally geodesic: starting in that plane
  // with in-plane velocity must stay in the plane
  Vec3 p = E.project({1.0, 0.0, 0.4});
  Vec3 v = E.tangent_project(p, {0.0, 0.0, 1.0});
  Vec3 q = E.exp(p, v);
  CHECK(std::abs(q[1]) < 1e-8);
  CHECK(std::abs(E.distance_to(q)) < 1e-8);
  // sphere special case: ellipsoid with equal axes reproduces great circles
  Ellipsoid S({1.0, 1.0, 1.0});
  UnitSphere ref;
  Vec3 b = normalized(Vec3{0.3, -0.5, 0.8});
  Vec3 w = S.tangent_project(b, {0.9, 0.1, 0.2});
  CHECK(dist(S.exp(b, w), ref.exp(b, w)) < 1e-7);
}

TEST_CASE("tangent projection is idempotent and kills the normal") {
  Ellipsoid E({1.2, 1.0, 0.9});
  auto rng = rng_for(17);
  for (int k = 0; k < 10; ++k) {
    Vec3 p = E.project(random_unit(rng));
    Vec3 v = 2.0 * random_unit(rng);
    Vec3 t = E.tangent_project(p, v);
    CHECK(std::abs(dot(t, E.unit_normal(p))) < 1e-13);
    CHECK(dist(E.tangent_project(p, t), t) < 1e-13);
  }
}

TEST_CASE("make_manifold dispatches and validates") {
  auto s = make_manifold("sphere", {1.0, 1.0, 1.0}, 1e-10);
  CHECK(s->kind() == EmbeddedManifold::Kind::UnitSphere);
  auto e = make_manifold("ellipsoid", {2.0, 1.0, 1.0}, 1e-10);
  CHECK(e->kind() == EmbeddedManifold::Kind::Ellipsoid);
  CHECK_THROWS_AS(make_manifold("plane", {1, 1, 1}, 1e-10), Error);
  CHECK_THROWS_AS(Ellipsoid({1.0, -1.0, 1.0}), Error);
}
