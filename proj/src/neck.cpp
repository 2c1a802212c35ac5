#include "sulab/neck.hpp"

#include <algorithm>
#include <cmath>

#include "sulab/energy.hpp"
#include "sulab/error.hpp"

namespace sulab {

NeckCurve circle_average(const MapField& u) {
  if (u.grid_kind != GridKind::Polar) throw Error("circle_average needs a polar field");
  const PolarGrid& g = u.polar;
  const int nt = g.n_theta;
  NeckCurve c;
  c.radii = g.radii;
  c.omega.resize(g.n_r + 1);
  c.max_ring_oscillation.resize(g.n_r + 1);
  for (int i = 0; i <= g.n_r; ++i) {
    Vec3 mean{0.0, 0.0, 0.0};
    for (int j = 0; j < nt; ++j) mean += u.at(g.index(i, j));
    c.omega[i] = (1.0 / nt) * mean;
    double osc = 0.0;
    for (int j = 0; j < nt; ++j)
      for (int k = j + 1; k < nt; ++k)
        osc = std::max(osc, dist(u.at(g.index(i, j)), u.at(g.index(i, k))));
    c.max_ring_oscillation[i] = osc;
  }
  c.speeds.resize(g.n_r + 1);
  for (int i = 0; i <= g.n_r; ++i) {
    const Stencil3 s = g.radial_stencil(i);
    c.speeds[i] =
        norm(s.ca * c.omega[s.ia] + s.cb * c.omega[s.ib] + s.cc * c.omega[s.ic]);
  }
  c.arc_length.resize(g.n_r + 1);
  c.arc_length[0] = 0.0;
  for (int i = 1; i <= g.n_r; ++i)
    c.arc_length[i] = c.arc_length[i - 1] + dist(c.omega[i], c.omega[i - 1]);
  return c;
}

NeckCurve slice_curve(const NeckCurve& curve, double r_lo, double r_hi) {
  NeckCurve out;
  out.projected = curve.projected;
  for (int i = 0; i < curve.size(); ++i) {
    if (curve.radii[i] < r_lo || curve.radii[i] > r_hi) continue;
    out.radii.push_back(curve.radii[i]);
    out.omega.push_back(curve.omega[i]);
    out.speeds.push_back(curve.speeds[i]);
    out.max_ring_oscillation.push_back(
        curve.max_ring_oscillation.empty() ? 0.0 : curve.max_ring_oscillation[i]);
  }
  if (out.size() < 3) throw BandOutOfRange("curve slice keeps fewer than 3 rings");
  out.arc_length.resize(out.size());
  out.arc_length[0] = 0.0;
  for (int i = 1; i < out.size(); ++i)
    out.arc_length[i] = out.arc_length[i - 1] + dist(out.omega[i], out.omega[i - 1]);
  return out;
}

// Fornberg weights for the k-th derivative (k <= m) at z over the nodes x;
// c is node-major with stride m+1.
static void fd_weights(double z, const double* x, int n, int m, double* c) {
  std::fill(c, c + n * (m + 1), 0.0);
  double c1 = 1.0, c4 = x[0] - z;
  c[0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i * (m + 1) + k] =
              c1 * (k * c[(i - 1) * (m + 1) + k - 1] - c5 * c[(i - 1) * (m + 1) + k]) /
              c2;
        c[i * (m + 1)] = -c1 * c5 * c[(i - 1) * (m + 1)] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[j * (m + 1) + k] = (c4 * c[j * (m + 1) + k] - k * c[j * (m + 1) + k - 1]) / c3;
      c[j * (m + 1)] = c4 * c[j * (m + 1)] / c3;
    }
    c1 = c2;
  }
}

GeodesicResidualResult geodesic_residual(const NeckCurve& curve,
                                         const EmbeddedManifold& N,
                                         double speed_floor) {
  if (curve.size() < 3) throw DegenerateSpeed("curve has fewer than 3 points");
  // Project to N, then drop points that do not advance along the curve.
  std::vector<Vec3> p;
  std::vector<double> s;
  p.reserve(curve.size());
  for (int i = 0; i < curve.size(); ++i) {
    const Vec3 q = N.project(curve.omega[i]);
    if (!p.empty() && dist(q, p.back()) < speed_floor) continue;
    if (p.empty())
      s.push_back(0.0);
    else
      s.push_back(s.back() + dist(q, p.back()));
    p.push_back(q);
  }
  const int m = static_cast<int>(p.size());
  if (m < 3) throw DegenerateSpeed("curve is degenerate after speed filtering");

  GeodesicResidualResult out;
  out.s.reserve(m - 2);
  out.per_point.reserve(m - 2);
  double acc = 0.0;
  // Differentiate through a 5-point window (3-point when the curve is short);
  // the wider stencil keeps the truncation error high order on graded samples.
  const int W = std::min(5, m);
  std::vector<double> cw(W * 3);
  for (int i = 1; i + 1 < m; ++i) {
    const int lo = std::clamp(i - W / 2, 0, m - W);
    fd_weights(s[i], s.data() + lo, W, 2, cw.data());
    Vec3 d1{0.0, 0.0, 0.0}, d2{0.0, 0.0, 0.0};
    for (int j = 0; j < W; ++j) {
      d1 += cw[j * 3 + 1] * p[lo + j];
      d2 += cw[j * 3 + 2] * p[lo + j];
    }
    const double s0 = s[i - 1], s2 = s[i + 1];
    const double speed2 = norm2(d1);
    if (speed2 < speed_floor * speed_floor)
      throw DegenerateSpeed("interior speed below floor");
    // Drop the velocity-parallel part of the defect: it is pure
    // reparametrization gauge (chord length is not exactly arc length),
    // and the unit-speed acceleration is velocity-orthogonal.
    Vec3 v = d2 - N.sff(p[i], d1, d1);
    v = v - (dot(v, d1) / speed2) * d1;
    const double res = norm(v) / speed2;
    out.s.push_back(s[i]);
    out.per_point.push_back(res);
    out.sup = std::max(out.sup, res);
    acc += res * res * 0.5 * (s2 - s0);
  }
  out.l2 = std::sqrt(acc);
  std::vector<double> sorted = out.per_point;
  std::sort(sorted.begin(), sorted.end());
  out.median = sorted[sorted.size() / 2];
  return out;
}

NeckProfileFit log_profile_fit(const MapField& u, const EmbeddedManifold& N,
                               double alpha, double t_alpha, double lambda_alpha,
                               double R, double bubble_energy) {
  if (u.grid_kind != GridKind::Polar) throw Error("log_profile_fit needs a polar field");
  if (!(alpha > 1.0)) throw Error("log_profile_fit needs alpha > 1");
  if (!std::isfinite(lambda_alpha)) throw NoNeck("no concentration scale");
  if (!(lambda_alpha > 0.0) || !(lambda_alpha < 1.0))
    throw Error("log_profile_fit expects lambda in (0,1)");
  if (!(R > 1.0)) throw Error("band factor R must exceed 1");
  const PolarGrid& g = u.polar;
  const double r_star = std::pow(lambda_alpha, t_alpha);
  const double r_lo = r_star / R, r_hi = r_star * R;
  if (r_lo < g.r_min * (1.0 - 1e-12) || r_hi > g.r_max * (1.0 + 1e-12))
    throw RadiusOutOfRange("fit band leaves the grid");

  const NeckCurve c = circle_average(u);
  std::vector<double> L;
  std::vector<Vec3> w;
  for (int i = 0; i < c.size(); ++i) {
    if (c.radii[i] < r_lo || c.radii[i] > r_hi) continue;
    L.push_back(std::log(c.radii[i]));
    w.push_back(c.omega[i]);
  }
  const int m = static_cast<int>(L.size());
  if (m < 3) throw BandOutOfRange("fit band keeps fewer than 3 rings");

  double Lbar = 0.0;
  Vec3 wbar{0.0, 0.0, 0.0};
  for (int i = 0; i < m; ++i) {
    Lbar += L[i];
    wbar += w[i];
  }
  Lbar /= m;
  wbar = (1.0 / m) * wbar;
  double var = 0.0;
  Vec3 cov{0.0, 0.0, 0.0};
  for (int i = 0; i < m; ++i) {
    const double dl = L[i] - Lbar;
    var += dl * dl;
    cov += dl * (w[i] - wbar);
  }
  const Vec3 slope = (1.0 / var) * cov;
  // Prop-style normalization: the limiting profile is (u - u0)/sqrt(alpha-1)
  // = a log r, so the raw log-radius slope carries a sqrt(alpha-1) factor.
  const Vec3 a_raw = (1.0 / std::sqrt(alpha - 1.0)) * slope;

  NeckProfileFit fit;
  fit.t_alpha = t_alpha;
  double rms = 0.0;
  for (int i = 0; i < m; ++i)
    rms += norm2(w[i] - (wbar + (L[i] - Lbar) * slope));
  fit.fit_rms = std::sqrt(rms / m);

  // Base point: circle average at the probe ring, projected to N.
  const int i0 = g.nearest_ring(r_star);
  Vec3 a = a_raw;
  try {
    const Vec3 base = N.project(c.omega[i0]);
    a = N.tangent_project(base, a_raw);
  } catch (const PointOutsideTubularNeighborhood&) {
    // Degenerate average (deep inside the target): keep the raw slope.
  }
  fit.a_vec = a;
  fit.normal_discarded = norm(a_raw - a);
  const double mu_hat = std::pow(lambda_alpha, 2.0 - 2.0 * alpha);
  fit.predicted_norm = std::pow(mu_hat, 1.0 - t_alpha) * std::sqrt(bubble_energy / kPi);
  fit.norm_ratio = norm(fit.a_vec) / fit.predicted_norm;
  return fit;
}

NeckLengthReport neck_length_report(const NeckCurve& curve, double nu_hat,
                                    double bubble_energy, double lambda_alpha,
                                    double t1, double t2) {
  if (!(nu_hat > 1.0 + 1e-9)) throw NoNeck("nu_hat at or below 1");
  if (!(t2 > 0.0) || !(t1 > t2) || !(t1 < 1.0))
    throw Error("band exponents need 0 < t2 < t1 < 1");
  if (!(lambda_alpha > 0.0) || !(lambda_alpha < 1.0))
    throw Error("neck_length_report expects lambda in (0,1)");
  const double r_lo = std::pow(lambda_alpha, t1);
  const double r_hi = std::pow(lambda_alpha, t2);
  if (curve.size() < 2) throw BandOutOfRange("curve too short");
  if (r_lo < curve.radii.front() * (1.0 - 1e-12) ||
      r_hi > curve.radii.back() * (1.0 + 1e-12))
    throw BandOutOfRange("length band leaves the curve");
  NeckLengthReport rep;
  rep.t1 = t1;
  rep.t2 = t2;
  int kept = 0;
  int prev = -1;
  for (int i = 0; i < curve.size(); ++i) {
    if (curve.radii[i] < r_lo || curve.radii[i] > r_hi) continue;
    if (prev >= 0) rep.measured_length += dist(curve.omega[i], curve.omega[prev]);
    prev = i;
    ++kept;
  }
  if (kept < 2) throw BandOutOfRange("length band keeps fewer than 2 rings");
  rep.predicted_length = (t1 - t2) * std::sqrt(bubble_energy / kPi) * std::log(nu_hat);
  rep.ratio = rep.measured_length / rep.predicted_length;
  return rep;
}

std::vector<OscillationRow> oscillation_profile(const MapField& u) {
  if (u.grid_kind != GridKind::Polar)
    throw Error("oscillation_profile needs a polar field");
  const PolarGrid& g = u.polar;
  const DerivField d = derivatives(u);
  const int nbands = static_cast<int>(std::ceil(std::log2(g.r_max / g.r_min) - 1e-12));
  std::vector<OscillationRow> rows(std::max(nbands, 1));
  for (int k = 0; k < static_cast<int>(rows.size()); ++k) {
    rows[k].k = k;
    rows[k].r_lo = g.r_min * std::pow(2.0, k);
    rows[k].r_hi = std::min(g.r_min * std::pow(2.0, k + 1), g.r_max);
  }
  // Oscillation: track band extremes via all node pairs inside each band.
  std::vector<std::vector<int>> band_rings(rows.size());
  for (int i = 0; i <= g.n_r; ++i) {
    int k = static_cast<int>(std::floor(std::log2(g.radii[i] / g.r_min)));
    k = std::clamp(k, 0, static_cast<int>(rows.size()) - 1);
    band_rings[k].push_back(i);
  }
  for (size_t k = 0; k < rows.size(); ++k) {
    std::vector<int> nodes;
    for (int i : band_rings[k])
      for (int j = 0; j < g.n_theta; ++j) nodes.push_back(g.index(i, j));
    // Cap the pairwise scan; a strided subsample of a smooth field moves the
    // diameter by no more than the node spacing oscillation.
    const size_t cap = 4096;
    const size_t stride = nodes.size() > cap ? (nodes.size() + cap - 1) / cap : 1;
    std::vector<int> pick;
    for (size_t a = 0; a < nodes.size(); a += stride) pick.push_back(nodes[a]);
    double osc = 0.0;
    for (size_t a = 0; a < pick.size(); ++a)
      for (size_t b = a + 1; b < pick.size(); ++b)
        osc = std::max(osc, dist(u.at(pick[a]), u.at(pick[b])));
    rows[k].osc = osc;
    double e = 0.0;
    for (int i : band_rings[k])
      for (int j = 0; j < g.n_theta; ++j) {
        const int q = g.index(i, j);
        e += g.node_weight(i) * d.D[q];
      }
    rows[k].energy = e;
  }
  return rows;
}

}  // namespace sulab
