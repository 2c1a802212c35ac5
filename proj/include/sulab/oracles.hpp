#pragma once

#include <functional>

#include "sulab/field.hpp"

namespace sulab {

// Inverse stereographic image of ((x-center)/lambda)^d; lands exactly on S^2
// with the south pole at the center and the north pole at infinity.
struct BubbleMap {
  double lambda = 1.0;
  Vec2 center{0.0, 0.0};
  int degree = 1;

  Vec3 operator()(Vec2 xy) const;
  // |grad u|^2 for d=1 (closed form); used by detection oracles.
  double density(Vec2 xy) const;
  // Dirichlet energy of the d=1 bubble over the disk of radius R (centered).
  static double disk_energy(double R, double lambda = 1.0) {
    double s = R / lambda;
    return 8.0 * kPi * s * s / (1.0 + s * s);
  }
  static double total_energy(int degree) { return 8.0 * kPi * degree; }
};

// u(r,theta) = (cos theta, sin theta, 0): harmonic into S^2 for every alpha.
struct EquatorMap {
  Vec2 center{0.0, 0.0};
  Vec3 operator()(Vec2 xy) const {
    double t = std::atan2(xy[1] - center[1], xy[0] - center[0]);
    return {std::cos(t), std::sin(t), 0.0};
  }
  static double annulus_energy(double a, double b) { return 2.0 * kPi * std::log(b / a); }
};

// Theta-independent log spiral along a geodesic: exp_y(a * ln(r/r_ref)).
struct LogNeckMap {
  const EmbeddedManifold* N = nullptr;
  Vec3 y{0.0, 0.0, 1.0};
  Vec3 a{0.0, 0.0, 0.0};
  double r_ref = 1.0;

  Vec3 operator()(double r, double /*theta*/) const {
    return N->exp(y, std::log(r / r_ref) * a);
  }
};

struct SyntheticFamilyParams {
  double alpha = 1.05;
  double lambda = 1e-3;
  double t1 = 0.985;  // neck band onset exponent (bubble side)
  double t2 = 0.012;  // neck band end exponent (body side)
  Vec3 a_dir{0.0, 1.0, 0.0};  // neck direction at the junction (tangent at north pole)
  int degree = 1;
  bool has_body_value = false;
  Vec3 body_value{0.0, 0.0, 1.0};
  double blend_logr = 0.1;  // smoothstep ramp width in log r
  bool calibrated = true;
  double a_norm = 0.0;  // |a| for the uncalibrated mode (rescaled units)
};

// Bubble core continued by a rotating neck: u(r,th) = R_e(psi(r)) * bubble(r,th)
// with d psi/d ln r following the calibrated log-profile law inside the band.
MapField synthetic_neck_family(const SyntheticFamilyParams& params,
                               const PolarGrid& grid);

// Adaptive Simpson in log r of the theta-averaged density over an annulus.
double integrate_annulus(const std::function<double(double, double)>& f_rtheta,
                         double a, double b, double tol);

// Truncation-extrapolated plane integral: disk integrals at doubling radii
// with Richardson in 1/R^2 until the estimate settles below tol.
double integrate_plane(const std::function<double(double, double)>& f_rtheta,
                       double tol);

}  // namespace sulab
