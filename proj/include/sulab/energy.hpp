#pragma once

#include <vector>

#include "sulab/field.hpp"

namespace sulab {

// First derivatives with metric normalization: on the torus (da, db) are
// (d/dx, d/dy); on a polar grid da = du/dr and db = (1/r) du/dtheta, so
// D = |da|^2 + |db|^2 is |grad u|^2 in both cases.
struct DerivField {
  std::vector<Vec3> da, db;
  std::vector<double> D;
};

DerivField derivatives(const MapField& u);

struct EnergyBreakdown {
  double alpha = 1.0;
  double epsilon = 1.0;
  double total = 0.0;      // integral of (eps + D)^alpha
  double dirichlet = 0.0;  // integral of D
  double radial = 0.0, angular = 0.0;  // polar grids only, zero otherwise
  double weight_sup = 1.0;             // sup of (eps + D)^(alpha-1)
  std::vector<double> density;         // per node, (eps + D)^alpha
};

EnergyBreakdown alpha_energy(const MapField& u, double alpha, double epsilon);

// Plain number when the density vector is not needed (line-search path).
double alpha_energy_value(const MapField& u, double alpha, double epsilon);

// Quadrature weight of a node.
double node_weight(const MapField& u, int node);

// Energy, per-node conformal weight w = (eps+D)^(alpha-1), and the exact
// ambient gradient, all from a single derivative pass.
struct EnergyEval {
  double energy = 0.0;
  std::vector<double> grad;  // 3 entries per node
  std::vector<double> w;
};

EnergyEval evaluate_energy_gradient(const MapField& u, double alpha, double epsilon);

// Exact derivative of the discrete energy with respect to each node value
// (includes quadrature weights), before any tangent projection.
std::vector<double> ambient_energy_gradient(const MapField& u, double alpha,
                                            double epsilon);

// Tangent-projected gradient, one ambient vector per node.
std::vector<Vec3> alpha_energy_gradient(const MapField& u, const EmbeddedManifold& N,
                                        double alpha, double epsilon);

struct ElResidual {
  double sup = 0.0;
  double l2 = 0.0;
};

// Euler-Lagrange residual: the tangent part of the discrete first variation,
// rescaled per node by 1/(2 alpha W w) so it is consistent with the strong
// equation. Three rings at each radial boundary are excluded from the norms:
// the one-sided boundary stencil measures the natural boundary condition, and
// its adjoint reaches two rings into the interior.
ElResidual el_residual(const MapField& u, const EmbeddedManifold& N, double alpha,
                       double epsilon);

// The per-node residual vectors behind el_residual; fixed Dirichlet nodes and
// boundary-masked rings are zero. Used as the solver's descent direction.
std::vector<Vec3> el_residual_field(const MapField& u, const EmbeddedManifold& N,
                                    double alpha, double epsilon, int mask_rings);

}  // namespace sulab
