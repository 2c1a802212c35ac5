#pragma once

#include <functional>
#include <vector>

#include "sulab/grid.hpp"
#include "sulab/manifold.hpp"

namespace sulab {

enum class GridKind { Torus, Polar };
enum class BoundaryKind { Periodic, DirichletRing };

// Ambient-valued map samples on a grid, K = 3 components per node.
struct MapField {
  GridKind grid_kind = GridKind::Torus;
  TorusGrid torus;
  PolarGrid polar;
  int K = 3;
  std::vector<double> values;  // node-major
  BoundaryKind bc = BoundaryKind::Periodic;
  bool fix_inner = false, fix_outer = false;  // DirichletRing detail (polar)
  double constraint_tol = 1e-8;

  int num_nodes() const {
    return grid_kind == GridKind::Torus ? torus.num_nodes() : polar.num_nodes();
  }
  Vec3 at(int node) const {
    return {values[3 * node], values[3 * node + 1], values[3 * node + 2]};
  }
  void set(int node, const Vec3& v) {
    values[3 * node] = v[0];
    values[3 * node + 1] = v[1];
    values[3 * node + 2] = v[2];
  }
  bool node_fixed(int node) const {
    if (bc != BoundaryKind::DirichletRing || grid_kind != GridKind::Polar) return false;
    int ring = node / polar.n_theta;
    return (fix_inner && ring == 0) || (fix_outer && ring == polar.n_r);
  }
};

MapField make_field(const TorusGrid& g);
MapField make_field(const PolarGrid& g, BoundaryKind bc = BoundaryKind::Periodic);

// Sample a world-coordinate map u(x, y) onto the grid.
void fill_field(MapField& f, const std::function<Vec3(Vec2)>& sampler);

// Sample a chart map u(r, theta) onto a polar grid.
void fill_field_polar(MapField& f, const std::function<Vec3(double, double)>& sampler);

// Max node distance to N.
double constraint_violation(const MapField& f, const EmbeddedManifold& N);

// Project every node onto N.
void project_field(MapField& f, const EmbeddedManifold& N);

// Periodic bilinear interpolation of a torus field at a world point.
Vec3 torus_bilinear(const MapField& f, Vec2 xy);

// Bilinear interpolation of a polar field in (log r, theta) chart coordinates.
Vec3 polar_bilinear(const MapField& f, double r, double theta);

// Interpolate a torus field onto a polar grid and project onto N.
MapField resample_to_polar(const MapField& f, const PolarGrid& polar,
                           const EmbeddedManifold& N);

}  // namespace sulab
