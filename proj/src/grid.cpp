#include "sulab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sulab {

TorusGrid::TorusGrid(int n_, double side_) : n(n_), side(side_) {
  if (n < 8) throw BadResolution("torus grid needs n >= 8, got " + std::to_string(n));
  if (!(side > 0.0)) throw BadRadii("torus side must be positive");
  h = side / n;
}

PolarGrid::PolarGrid(Vec2 center_, double r_min_, double r_max_, int n_r_, int n_theta_)
    : center(center_), r_min(r_min_), r_max(r_max_), n_r(n_r_), n_theta(n_theta_) {
  if (!(r_min > 0.0) || !(r_max > r_min))
    throw BadRadii("polar grid needs 0 < r_min < r_max");
  if (n_r < 16 || n_theta < 16)
    throw BadResolution("polar grid needs n_r, n_theta >= 16");
  rho = std::pow(r_max / r_min, 1.0 / n_r);
  dtheta = 2.0 * kPi / n_theta;
  radii.resize(n_r + 1);
  for (int i = 0; i <= n_r; ++i) radii[i] = r_min * std::pow(rho, i);
  radii[n_r] = r_max;  // clamp accumulated rounding
  phi.assign(num_nodes(), 0.0);
}

double PolarGrid::measure() const {
  double m = 0.0;
  for (int i = 0; i <= n_r; ++i) m += radii[i] * dr(i);
  return m * 2.0 * kPi;
}

Stencil3 PolarGrid::radial_stencil(int i) const {
  Stencil3 s;
  if (i == 0) {
    s.ia = 0; s.ib = 1; s.ic = 2;
  } else if (i == n_r) {
    s.ia = n_r - 2; s.ib = n_r - 1; s.ic = n_r;
  } else {
    s.ia = i - 1; s.ib = i; s.ic = i + 1;
  }
  lagrange3_deriv(radii[s.ia], radii[s.ib], radii[s.ic], radii[i], s.ca, s.cb, s.cc);
  return s;
}

int PolarGrid::nearest_ring(double r) const {
  if (!(r > 0.0)) throw RingNotOnGrid("ring radius must be positive");
  double k = std::log(r / r_min) / std::log(rho);
  int i = (int)std::lround(k);
  return std::clamp(i, 0, n_r);
}

TorusGrid build_torus_grid(int n, double side) { return TorusGrid(n, side); }

PolarGrid build_polar_grid(Vec2 center, double r_min, double r_max, int n_r,
                           int n_theta) {
  return PolarGrid(center, r_min, r_max, n_r, n_theta);
}

}  // namespace sulab
