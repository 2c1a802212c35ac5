#pragma once

#include <vector>

#include "sulab/field.hpp"

namespace sulab {

struct NeckCurve {
  std::vector<double> radii;
  std::vector<Vec3> omega;        // circle average per ring
  std::vector<double> speeds;     // |d omega / dr|
  std::vector<double> arc_length; // cumulative chord length
  std::vector<double> max_ring_oscillation;
  bool projected = false;  // whether omega lies on N

  int size() const { return static_cast<int>(radii.size()); }
};

// Angular mean of the map on every ring, with per-ring oscillation.
NeckCurve circle_average(const MapField& u);

// Restriction of a curve to rings with radius in [r_lo, r_hi]; arc length is
// re-based at the band start.
NeckCurve slice_curve(const NeckCurve& curve, double r_lo, double r_hi);

struct GeodesicResidualResult {
  std::vector<double> s;          // arc length at evaluated points
  std::vector<double> per_point;  // |omega_ss - A(omega_s, omega_s)| / |omega_s|^2
  double sup = 0.0;
  double l2 = 0.0;      // sqrt of the arc-length-weighted sum of squares
  double median = 0.0;  // robust summary used for schedule trends
};

// Geodesic equation residual of the projected curve in the arc-length
// parameter, via three-point nonuniform differences. Rings closer than
// speed_floor to their predecessor are dropped first.
GeodesicResidualResult geodesic_residual(const NeckCurve& curve,
                                         const EmbeddedManifold& N,
                                         double speed_floor = 1e-10);

struct NeckProfileFit {
  double t_alpha = 0.0;
  Vec3 a_vec{0.0, 0.0, 0.0};  // fitted log-radial slope, tangent-projected
  double normal_discarded = 0.0;  // norm of the projected-away component
  double fit_rms = 0.0;
  double predicted_norm = 0.0;  // mu_hat^(1-t) sqrt(bubble_energy / pi)
  double norm_ratio = 0.0;      // |a_vec| / predicted_norm
};

// Least-squares slope of the circle averages against log radius over the band
// lambda^t * [1/R, R].
NeckProfileFit log_profile_fit(const MapField& u, const EmbeddedManifold& N,
                               double alpha, double t_alpha, double lambda_alpha,
                               double R, double bubble_energy);

struct NeckLengthReport {
  double t1 = 0.0, t2 = 0.0;
  double measured_length = 0.0;
  double predicted_length = 0.0;  // (t1 - t2) sqrt(bubble_energy/pi) log nu_hat
  double ratio = 0.0;
};

NeckLengthReport neck_length_report(const NeckCurve& curve, double nu_hat,
                                    double bubble_energy, double lambda_alpha,
                                    double t1, double t2);

struct OscillationRow {
  int k = 0;
  double r_lo = 0.0, r_hi = 0.0;
  double osc = 0.0;     // max pairwise node distance in the dyadic band
  double energy = 0.0;  // Dirichlet energy of the band
};

// Dyadic-annulus oscillation and energy profile, bands doubling from r_min.
std::vector<OscillationRow> oscillation_profile(const MapField& u);

}  // namespace sulab
