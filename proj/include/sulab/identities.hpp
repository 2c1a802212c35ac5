#pragma once

#include <vector>

#include "sulab/energy.hpp"
#include "sulab/field.hpp"

namespace sulab {

struct IdentityReport {
  double t = 0.0;        // requested radius
  double r = 0.0;        // grid ring actually used
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;             // lhs - rhs
  double normalizer = 0.0;           // max(|lhs|, |rhs|, 1e-8)
  double inner_boundary_term = 0.0;  // contribution of the inner anchor ring to rhs
};

// Boundary variational identity on the annulus between an inner anchor ring
// and radius t: with w = (eps+D)^(a-1) and F = w (eps+D),
//   r oint [ w|u_r|^2 - F/(2a) ] ds0  evaluated at t minus at the anchor
//     = ((a-1)/a) int w D dx - (eps/a) int w dx   over the annulus.
// Both sides are divided by t so the report scales like a flux density.
// The identity holds between any two rings; the anchor sits a few rings
// inside the domain, clear of the one-sided boundary stencils, so it reads a
// faithful flux even on discrete minimizers (which kink at fixed rings).
IdentityReport boundary_variational_identity(const MapField& u, double alpha,
                                             double epsilon, double t);

// Pohozaev identity on the same annulus:
//   r oint [ |u_r|^2 - D/2 ] ds0  at t minus at the anchor = (a-1) H,
//   H = - int r [ dD/dr |u_r|^2 + (1/r) dD/dth <u_th, u_r> ] / (eps+D) dx.
IdentityReport pohozaev_identity(const MapField& u, double alpha, double epsilon,
                                 double t);

struct ProfileRow {
  double t = 0.0;   // log-radius coordinate, r = lambda^t
  double r = 0.0;   // ring radius used
  double F = 0.0;   // int_{B_r} w D dx (from the inner grid edge)
  double E_r = 0.0;     // radial part, int w |u_r|^2
  double E_theta = 0.0; // angular part, int w |u_th|^2 / r^2
  double H = 0.0;       // Pohozaev bulk term on the same region
};

// Weighted energy of the sub-annulus [r_min, lambda^t] for each t in t_grid.
std::vector<ProfileRow> radial_energy_profile(const MapField& u, double alpha,
                                              double epsilon, double lambda,
                                              const std::vector<double>& t_grid);

struct CircleAverageCheck {
  double lhs = 0.0;  // int |d/dr of circle average|^2 dx
  double rhs = 0.0;  // int |du/dr|^2 dx
  int ring_violations = 0;  // rings where the per-ring inequality fails
};

// Radial Dirichlet energy of the circle-averaged curve never exceeds the
// radial energy of the map itself.
CircleAverageCheck circle_average_inequality_check(const MapField& u);

// Least-squares amplitude A minimizing sum_i (F_i - A * decay_i)^2 where
// decay_i = mu^(1 - t_i); rows outside [t_lo, t_hi] are ignored.
double fit_profile_amplitude(const std::vector<ProfileRow>& rows, double mu_hat,
                             double t_lo, double t_hi);

}  // namespace sulab
