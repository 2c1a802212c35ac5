#pragma once

#include <cmath>
#include <vector>

#include "sulab/error.hpp"
#include "sulab/vecops.hpp"

namespace sulab {

// Three-point derivative stencil: df(at) = ca*f(ia) + cb*f(ib) + cc*f(ic).
struct Stencil3 {
  int ia, ib, ic;
  double ca, cb, cc;
};

// Derivative coefficients of the quadratic through (x0,x1,x2) evaluated at x.
inline void lagrange3_deriv(double x0, double x1, double x2, double x,
                            double& c0, double& c1, double& c2) {
  c0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
  c1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
  c2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
}

// Flat periodic square grid, metric phi = 0 everywhere.
struct TorusGrid {
  int n = 0;
  double side = 0.0;
  double h = 0.0;

  TorusGrid() = default;
  TorusGrid(int n_, double side_);

  int num_nodes() const { return n * n; }
  int wrap(int i) const {
    int m = i % n;
    return m < 0 ? m + n : m;
  }
  int index(int i, int j) const { return wrap(i) * n + wrap(j); }
  Vec2 position(int i, int j) const { return {i * h, j * h}; }
  double node_weight() const { return h * h; }
  double measure() const { return side * side; }
};

// Annulus grid with geometrically spaced rings; ring i = r_min * rho^i,
// i = 0..n_r, so dyadic bands land on whole rings.
struct PolarGrid {
  Vec2 center{0.0, 0.0};
  double r_min = 0.0, r_max = 0.0;
  int n_r = 0, n_theta = 0;
  double rho = 1.0;
  double dtheta = 0.0;
  std::vector<double> radii;  // n_r + 1 entries
  std::vector<double> phi;    // conformal factor per node; zero unless set

  PolarGrid() = default;
  PolarGrid(Vec2 center_, double r_min_, double r_max_, int n_r_, int n_theta_);

  int num_rings() const { return n_r + 1; }
  int num_nodes() const { return num_rings() * n_theta; }
  int wrap_theta(int j) const {
    int m = j % n_theta;
    return m < 0 ? m + n_theta : m;
  }
  int index(int i, int j) const { return i * n_theta + wrap_theta(j); }
  double theta(int j) const { return j * dtheta; }
  Vec2 position(int i, int j) const {
    double t = theta(j);
    return {center[0] + radii[i] * std::cos(t), center[1] + radii[i] * std::sin(t)};
  }

  // Trapezoid half-interval around ring i.
  double dr(int i) const {
    if (i == 0) return 0.5 * (radii[1] - radii[0]);
    if (i == n_r) return 0.5 * (radii[n_r] - radii[n_r - 1]);
    return 0.5 * (radii[i + 1] - radii[i - 1]);
  }
  double node_weight(int i) const { return radii[i] * dr(i) * dtheta; }
  double measure() const;

  // Radial derivative stencil at ring i (one-sided at the first/last ring).
  Stencil3 radial_stencil(int i) const;

  // Ring whose radius is nearest to r in log scale.
  int nearest_ring(double r) const;

  // Trapezoid weights for integrating over rings [i_lo, i_hi] only.
  double band_dr(int i, int i_lo, int i_hi) const {
    if (i_lo == i_hi) return 0.0;
    if (i == i_lo) return 0.5 * (radii[i + 1] - radii[i]);
    if (i == i_hi) return 0.5 * (radii[i] - radii[i - 1]);
    return 0.5 * (radii[i + 1] - radii[i - 1]);
  }
};

TorusGrid build_torus_grid(int n, double side);
PolarGrid build_polar_grid(Vec2 center, double r_min, double r_max, int n_r,
                           int n_theta);

}  // namespace sulab
