#include "sulab/identities.hpp"

#include <cmath>

#include "sulab/error.hpp"

namespace sulab {

namespace {

const PolarGrid& require_polar(const MapField& u) {
  if (u.grid_kind != GridKind::Polar) throw Error("identity requires a polar grid");
  return u.polar;
}

// Ring whose radius is log-nearest to t; t must land inside the grid's
// log-radius range (within half a spacing of the end rings).
int ring_for_radius(const PolarGrid& g, double t, bool radius_error) {
  // signed ring coordinate: 0 at r_min, n_r at r_max
  const double x = t > 0.0 ? std::log(t / g.r_min) / std::log(g.rho) : -1e300;
  if (!(x > -0.5 - 1e-9) || !(x < g.n_r + 0.5 + 1e-9)) {
    if (radius_error)
      throw RadiusOutOfRange("radius is outside the grid");
    throw RingNotOnGrid("radius does not match a grid ring");
  }
  return g.nearest_ring(t);
}

struct RingQuantities {
  DerivField d;
  std::vector<double> w;  // (eps+D)^(alpha-1)
};

RingQuantities ring_quantities(const MapField& u, double alpha, double epsilon) {
  RingQuantities rq;
  rq.d = derivatives(u);
  rq.w.resize(u.num_nodes());
  for (size_t q = 0; q < rq.w.size(); ++q)
    rq.w[q] = std::pow(epsilon + rq.d.D[q], alpha - 1.0);
  return rq;
}

// r oint f ds0 over ring i, for per-node integrand f(q).
template <class F>
double ring_flux(const PolarGrid& g, int i, F f) {
  double s = 0.0;
  for (int j = 0; j < g.n_theta; ++j) s += f(g.index(i, j));
  const double r = g.radii[i];
  return r * r * g.dtheta * s;
}

// Single-ring readings alias the ring-alternating component that discrete
// minimizers carry (central radial differences are blind to it, so descent
// cannot remove it).  A 1/4-1/2-1/4 average over adjacent rings cancels the
// alternation exactly and perturbs smooth fields only at quadrature order.
template <class F>
double ring_flux_filtered(const PolarGrid& g, int i, F f) {
  if (i == 0 || i == g.n_r) return ring_flux(g, i, f);
  return 0.25 * ring_flux(g, i - 1, f) + 0.5 * ring_flux(g, i, f) +
         0.25 * ring_flux(g, i + 1, f);
}

// int f dx over the sub-annulus of rings [i_lo, i_hi], trapezoid in r.
template <class F>
double band_integral(const PolarGrid& g, int i_lo, int i_hi, F f) {
  double acc = 0.0;
  for (int k = i_lo; k <= i_hi; ++k) {
    const double Wb = g.radii[k] * g.band_dr(k, i_lo, i_hi) * g.dtheta;
    double s = 0.0;
    for (int j = 0; j < g.n_theta; ++j) s += f(g.index(k, j));
    acc += Wb * s;
  }
  return acc;
}

// The one-sided radial stencil at a fixed ring is not the adjoint of the
// interior scheme, so discrete minimizers carry a kink over the first few
// rings and flux read there is not a faithful boundary flux.  Both identities
// hold between any two rings, so anchor the inner flux just outside that
// layer instead of at the boundary ring itself.  An even ring: the kink's
// ring-alternating tail is much weaker on rings with the parity of the fixed
// ring, and ring 4 is the first such ring clear of the one-sided zone.
constexpr int kInnerAnchor = 4;

int inner_anchor_ring(const PolarGrid& g, int it) {
  if (it <= kInnerAnchor)
    throw RingNotOnGrid("radius lands inside the inner boundary layer");
  return kInnerAnchor;
}

// Pohozaev bulk integrand S/(eps+D) with
// S = r dD/dr |u_r|^2 + dD/dth <u_th/r, u_r>.
std::vector<double> pohozaev_bulk(const MapField& u, const RingQuantities& rq,
                                  double epsilon) {
  const PolarGrid& g = u.polar;
  const int nt = g.n_theta;
  std::vector<double> out(u.num_nodes());
  const double inv2t = 1.0 / (2.0 * g.dtheta);
  for (int i = 0; i <= g.n_r; ++i) {
    const Stencil3 s = g.radial_stencil(i);
    for (int j = 0; j < nt; ++j) {
      const int q = g.index(i, j);
      const double dDdr = s.ca * rq.d.D[g.index(s.ia, j)] +
                          s.cb * rq.d.D[g.index(s.ib, j)] +
                          s.cc * rq.d.D[g.index(s.ic, j)];
      const double dDdth =
          inv2t * (rq.d.D[g.index(i, (j + 1) % nt)] - rq.d.D[g.index(i, (j + nt - 1) % nt)]);
      const double S = g.radii[i] * dDdr * norm2(rq.d.da[q]) +
                       dDdth * dot(rq.d.db[q], rq.d.da[q]);
      out[q] = S / (epsilon + rq.d.D[q]);
    }
  }
  return out;
}

IdentityReport finish_report(double t, double r, double lhs, double rhs, double inner) {
  IdentityReport rep;
  rep.t = t;
  rep.r = r;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.residual = lhs - rhs;
  rep.normalizer = std::max({std::abs(lhs), std::abs(rhs), 1e-8});
  rep.inner_boundary_term = inner;
  return rep;
}

}  // namespace

IdentityReport boundary_variational_identity(const MapField& u, double alpha,
                                             double epsilon, double t) {
  const PolarGrid& g = require_polar(u);
  const int it = ring_for_radius(g, t, false);
  const int ia = inner_anchor_ring(g, it);
  const RingQuantities rq = ring_quantities(u, alpha, epsilon);
  auto flux_term = [&](int q) {
    return rq.w[q] * norm2(rq.d.da[q]) -
           rq.w[q] * (epsilon + rq.d.D[q]) / (2.0 * alpha);
  };
  const double T_t = ring_flux_filtered(g, it, flux_term);
  const double T_a = ring_flux_filtered(g, ia, flux_term);
  const double vol_wD =
      band_integral(g, ia, it, [&](int q) { return rq.w[q] * rq.d.D[q]; });
  const double vol_w = band_integral(g, ia, it, [&](int q) { return rq.w[q]; });
  const double r = g.radii[it];
  const double lhs = T_t / r;
  const double rhs =
      (T_a + ((alpha - 1.0) / alpha) * vol_wD - (epsilon / alpha) * vol_w) / r;
  return finish_report(t, r, lhs, rhs, T_a / r);
}

IdentityReport pohozaev_identity(const MapField& u, double alpha, double epsilon,
                                 double t) {
  const PolarGrid& g = require_polar(u);
  const int it = ring_for_radius(g, t, false);
  const int ia = inner_anchor_ring(g, it);
  const RingQuantities rq = ring_quantities(u, alpha, epsilon);
  auto flux_term = [&](int q) { return norm2(rq.d.da[q]) - 0.5 * rq.d.D[q]; };
  const double G_t = ring_flux_filtered(g, it, flux_term);
  const double G_a = ring_flux_filtered(g, ia, flux_term);
  const std::vector<double> bulk = pohozaev_bulk(u, rq, epsilon);
  const double H = -band_integral(g, ia, it, [&](int q) { return bulk[q]; });
  const double r = g.radii[it];
  const double lhs = G_t / r;
  const double rhs = (G_a + (alpha - 1.0) * H) / r;
  return finish_report(t, r, lhs, rhs, G_a / r);
}

std::vector<ProfileRow> radial_energy_profile(const MapField& u, double alpha,
                                              double epsilon, double lambda,
                                              const std::vector<double>& t_grid) {
  const PolarGrid& g = require_polar(u);
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw Error("radial_energy_profile expects lambda in (0,1)");
  const RingQuantities rq = ring_quantities(u, alpha, epsilon);
  const std::vector<double> bulk = pohozaev_bulk(u, rq, epsilon);
  std::vector<ProfileRow> rows;
  rows.reserve(t_grid.size());
  for (double t : t_grid) {
    const double r_req = std::pow(lambda, t);
    const int i = ring_for_radius(g, r_req, true);
    ProfileRow row;
    row.t = t;
    row.r = g.radii[i];
    row.F = band_integral(g, 0, i, [&](int q) { return rq.w[q] * rq.d.D[q]; });
    row.E_r =
        band_integral(g, 0, i, [&](int q) { return rq.w[q] * norm2(rq.d.da[q]); });
    row.E_theta =
        band_integral(g, 0, i, [&](int q) { return rq.w[q] * norm2(rq.d.db[q]); });
    row.H = -band_integral(g, 0, i, [&](int q) { return bulk[q]; });
    rows.push_back(row);
  }
  return rows;
}

CircleAverageCheck circle_average_inequality_check(const MapField& u) {
  const PolarGrid& g = require_polar(u);
  const DerivField d = derivatives(u);
  CircleAverageCheck out;
  const int nt = g.n_theta;
  for (int i = 0; i <= g.n_r; ++i) {
    Vec3 mean{0.0, 0.0, 0.0};
    double sum2 = 0.0;
    for (int j = 0; j < nt; ++j) {
      const Vec3& ur = d.da[g.index(i, j)];
      mean += ur;
      sum2 += norm2(ur);
    }
    mean = (1.0 / nt) * mean;
    const double lhs_ring = 2.0 * kPi * norm2(mean);
    const double rhs_ring = g.dtheta * sum2;
    const double Wr = g.radii[i] * g.dr(i);
    out.lhs += Wr * lhs_ring;
    out.rhs += Wr * rhs_ring;
    if (lhs_ring > rhs_ring + 1e-14 * std::max(1.0, rhs_ring)) ++out.ring_violations;
  }
  return out;
}

double fit_profile_amplitude(const std::vector<ProfileRow>& rows, double mu_hat,
                             double t_lo, double t_hi) {
  double num = 0.0, den = 0.0;
  for (const ProfileRow& row : rows) {
    if (row.t < t_lo || row.t > t_hi) continue;
    const double decay = std::pow(mu_hat, 1.0 - row.t);
    num += row.F * decay;
    den += decay * decay;
  }
  if (den == 0.0) throw Error("no profile rows inside the fit band");
  return num / den;
}

}  // namespace sulab
