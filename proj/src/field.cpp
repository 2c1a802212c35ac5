#include "sulab/field.hpp"

#include <algorithm>
#include <cmath>

#include "sulab/parallel.hpp"

namespace sulab {

MapField make_field(const TorusGrid& g) {
  MapField f;
  f.grid_kind = GridKind::Torus;
  f.torus = g;
  f.bc = BoundaryKind::Periodic;
  f.values.assign(3 * g.num_nodes(), 0.0);
  return f;
}

MapField make_field(const PolarGrid& g, BoundaryKind bc) {
  MapField f;
  f.grid_kind = GridKind::Polar;
  f.polar = g;
  f.bc = bc;
  f.values.assign(3 * g.num_nodes(), 0.0);
  return f;
}

void fill_field(MapField& f, const std::function<Vec3(Vec2)>& sampler) {
  if (f.grid_kind == GridKind::Torus) {
    const TorusGrid& g = f.torus;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        f.set(g.index(i, j), sampler(g.position(i, j)));
  } else {
    const PolarGrid& g = f.polar;
    for (int i = 0; i <= g.n_r; ++i)
      for (int j = 0; j < g.n_theta; ++j)
        f.set(g.index(i, j), sampler(g.position(i, j)));
  }
}

void fill_field_polar(MapField& f, const std::function<Vec3(double, double)>& sampler) {
  if (f.grid_kind != GridKind::Polar) throw Error("fill_field_polar needs a polar field");
  const PolarGrid& g = f.polar;
  for (int i = 0; i <= g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j)
      f.set(g.index(i, j), sampler(g.radii[i], g.theta(j)));
}

double constraint_violation(const MapField& f, const EmbeddedManifold& N) {
  double worst = 0.0;
  int m = f.num_nodes();
  for (int q = 0; q < m; ++q) worst = std::max(worst, N.distance_to(f.at(q)));
  return worst;
}

void project_field(MapField& f, const EmbeddedManifold& N) {
  parallel_for(0, f.num_nodes(), [&](int q) { f.set(q, N.project(f.at(q))); });
}

Vec3 torus_bilinear(const MapField& f, Vec2 xy) {
  if (f.grid_kind != GridKind::Torus) throw Error("bilinear sampling needs a torus field");
  const TorusGrid& g = f.torus;
  double fx = xy[0] / g.h, fy = xy[1] / g.h;
  int i0 = (int)std::floor(fx), j0 = (int)std::floor(fy);
  double ax = fx - i0, ay = fy - j0;
  Vec3 v00 = f.at(g.index(i0, j0));
  Vec3 v10 = f.at(g.index(i0 + 1, j0));
  Vec3 v01 = f.at(g.index(i0, j0 + 1));
  Vec3 v11 = f.at(g.index(i0 + 1, j0 + 1));
  Vec3 out;
  for (int c = 0; c < 3; ++c)
    out[c] = (1 - ax) * (1 - ay) * v00[c] + ax * (1 - ay) * v10[c] +
             (1 - ax) * ay * v01[c] + ax * ay * v11[c];
  return out;
}

Vec3 polar_bilinear(const MapField& f, double r, double theta) {
  if (f.grid_kind != GridKind::Polar) throw Error("polar sampling needs a polar field");
  const PolarGrid& g = f.polar;
  if (!(r >= g.r_min * (1.0 - 1e-12)) || !(r <= g.r_max * (1.0 + 1e-12)))
    throw RadiusOutOfRange("sample radius outside the annulus");
  double L = std::log(std::max(r, g.r_min) / g.r_min) / std::log(g.rho);
  int i0 = std::min((int)std::floor(L), g.n_r - 1);
  if (i0 < 0) i0 = 0;
  double ar = std::min(std::max(L - i0, 0.0), 1.0);
  double ft = theta / g.dtheta;
  int j0 = (int)std::floor(ft);
  double at = ft - j0;
  Vec3 v00 = f.at(g.index(i0, j0));
  Vec3 v10 = f.at(g.index(i0 + 1, j0));
  Vec3 v01 = f.at(g.index(i0, j0 + 1));
  Vec3 v11 = f.at(g.index(i0 + 1, j0 + 1));
  Vec3 out;
  for (int c = 0; c < 3; ++c)
    out[c] = (1 - ar) * (1 - at) * v00[c] + ar * (1 - at) * v10[c] +
             (1 - ar) * at * v01[c] + ar * at * v11[c];
  return out;
}

MapField resample_to_polar(const MapField& f, const PolarGrid& polar,
                           const EmbeddedManifold& N) {
  if (f.grid_kind != GridKind::Torus) throw Error("resample source must be a torus field");
  if (polar.r_max > 0.5 * f.torus.side)
    throw AnnulusOutOfBounds("polar annulus exceeds half the torus side");
  MapField out = make_field(polar);
  fill_field(out, [&](Vec2 xy) { return N.project(torus_bilinear(f, xy)); });
  return out;
}

}  // namespace sulab
