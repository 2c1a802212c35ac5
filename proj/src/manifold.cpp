#include "sulab/manifold.hpp"

#include <algorithm>
#include <cmath>

namespace sulab {

Vec3 UnitSphere::project(const Vec3& p) const {
  double n = norm(p);
  if (n < 1e-14)
    throw PointOutsideTubularNeighborhood("sphere projection of near-zero point");
  return {p[0] / n, p[1] / n, p[2] / n};
}

Vec3 UnitSphere::sff(const Vec3& p, const Vec3& X, const Vec3& Y) const {
  Vec3 Xt = tangent_project(p, X);
  Vec3 Yt = tangent_project(p, Y);
  return -dot(Xt, Yt) * p;
}

Vec3 UnitSphere::exp(const Vec3& p, const Vec3& v) const {
  Vec3 vt = tangent_project(p, v);
  double s = norm(vt);
  if (s < 1e-15) return p;
  Vec3 dir = {vt[0] / s, vt[1] / s, vt[2] / s};
  return std::cos(s) * p + std::sin(s) * dir;
}

Ellipsoid::Ellipsoid(const Vec3& semi_axes, double proj_tol)
    : EmbeddedManifold(Kind::Ellipsoid, proj_tol), axes_(semi_axes) {
  for (int i = 0; i < 3; ++i) {
    if (!(semi_axes[i] > 0.0))
      throw Error("ellipsoid semi-axes must be positive");
    m_[i] = 1.0 / (semi_axes[i] * semi_axes[i]);
  }
}

// Nearest point: x_i = p_i/(1+t m_i) with F(t)=sum m_i x_i^2 - 1 = 0.
// F is strictly decreasing on t > -1/m_max; safeguarded Newton on a bracket.
Vec3 Ellipsoid::project(const Vec3& p) const {
  auto eval = [&](double t, double& F, double& dF) {
    F = -1.0;
    dF = 0.0;
    for (int i = 0; i < 3; ++i) {
      double d = 1.0 + t * m_[i];
      double xi = p[i] / d;
      F += m_[i] * xi * xi;
      dF += -2.0 * m_[i] * m_[i] * xi * xi / d;
    }
  };
  double m_max = std::max({m_[0], m_[1], m_[2]});
  double t_pole = -1.0 / m_max;
  double F, dF;
  eval(0.0, F, dF);
  double t_lo, t_hi;  // bracket with F(t_lo) >= 0 >= F(t_hi)
  if (F >= 0.0) {
    t_lo = 0.0;
    t_hi = 1.0 / m_max;
    eval(t_hi, F, dF);
    int guard = 0;
    while (F > 0.0) {
      t_lo = t_hi;
      t_hi *= 2.0;
      eval(t_hi, F, dF);
      if (++guard > 200)
        throw PointOutsideTubularNeighborhood("ellipsoid projection bracket overflow");
    }
  } else {
    // interior point: root sits between the pole and 0 when p has weight on
    // a max-curvature axis; otherwise there is no admissible root
    t_hi = 0.0;
    t_lo = 0.5 * t_pole;
    eval(t_lo, F, dF);
    int guard = 0;
    while (F < 0.0) {
      t_hi = t_lo;
      t_lo = 0.5 * (t_lo + t_pole);
      eval(t_lo, F, dF);
      if (++guard > 200)
        throw PointOutsideTubularNeighborhood("ellipsoid projection of deep interior point");
    }
  }
  double t = 0.5 * (t_lo + t_hi);
  const int max_iter = 100;
  bool done = false;
  for (int it = 0; it < max_iter; ++it) {
    eval(t, F, dF);
    if (std::abs(F) < 1e-14) {
      done = true;
      break;
    }
    if (F > 0.0) t_lo = t; else t_hi = t;
    double t_newton = (dF != 0.0) ? t - F / dF : t;
    t = (t_newton > t_lo && t_newton < t_hi) ? t_newton : 0.5 * (t_lo + t_hi);
  }
  if (!done && std::abs(F) > 1e-10)
    throw PointOutsideTubularNeighborhood("ellipsoid projection Newton did not converge");
  Vec3 x;
  for (int i = 0; i < 3; ++i) x[i] = p[i] / (1.0 + t * m_[i]);
  return x;
}

Vec3 Ellipsoid::unit_normal(const Vec3& p) const {
  Vec3 g = {m_[0] * p[0], m_[1] * p[1], m_[2] * p[2]};
  return normalized(g);
}

// Polarized second difference of the projection map, then forced normal.
Vec3 Ellipsoid::sff(const Vec3& p, const Vec3& X, const Vec3& Y) const {
  Vec3 Xt = tangent_project(p, X);
  Vec3 Yt = tangent_project(p, Y);
  double nx = norm(Xt), ny = norm(Yt);
  if (nx < 1e-14 || ny < 1e-14) return {0.0, 0.0, 0.0};
  Vec3 ux = (1.0 / nx) * Xt, uy = (1.0 / ny) * Yt;
  double scale = std::min({axes_[0], axes_[1], axes_[2]});
  double s = 1e-5 * scale;
  Vec3 fpp = project(p + s * ux + s * uy);
  Vec3 fpm = project(p + s * ux - s * uy);
  Vec3 fmp = project(p - s * ux + s * uy);
  Vec3 fmm = project(p - s * ux - s * uy);
  Vec3 d2 = (1.0 / (4.0 * s * s)) * ((fpp - fpm) - (fmp - fmm));
  Vec3 n = unit_normal(p);
  return (nx * ny * dot(d2, n)) * n;
}

// RK4 on the first-order system with per-step reprojection; the step count
// doubles until two refinements agree.
Vec3 Ellipsoid::exp(const Vec3& p, const Vec3& v) const {
  Vec3 vt = tangent_project(p, v);
  double speed = norm(vt);
  if (speed < 1e-15) return p;

  auto acc = [&](const Vec3& q, const Vec3& dq) { return sff(q, dq, dq); };
  auto integrate = [&](int nsteps) {
    Vec3 q = p, dq = vt;
    double h = 1.0 / nsteps;
    for (int k = 0; k < nsteps; ++k) {
      Vec3 k1q = dq, k1v = acc(q, dq);
      Vec3 q2 = q + (0.5 * h) * k1q, v2 = dq + (0.5 * h) * k1v;
      Vec3 k2q = v2, k2v = acc(project(q2), v2);
      Vec3 q3 = q + (0.5 * h) * k2q, v3 = dq + (0.5 * h) * k2v;
      Vec3 k3q = v3, k3v = acc(project(q3), v3);
      Vec3 q4 = q + h * k3q, v4 = dq + h * k3v;
      Vec3 k4q = v4, k4v = acc(project(q4), v4);
      q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
      dq += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      q = project(q);
      dq = tangent_project(q, dq);
      double sp = norm(dq);
      if (sp < 1e-15) throw IntegrationFailure("geodesic speed collapsed");
      dq = (speed / sp) * dq;
    }
    return q;
  };

  double scale = std::min({axes_[0], axes_[1], axes_[2]});
  int n = std::max(16, (int)std::ceil(8.0 * speed / scale));
  Vec3 prev = integrate(n);
  for (int level = 0; level < 8; ++level) {
    n *= 2;
    if (n > (1 << 22)) throw IntegrationFailure("geodesic step control underflow");
    Vec3 cur = integrate(n);
    if (dist(cur, prev) < 1e-10 * (1.0 + speed)) return cur;
    prev = cur;
  }
  return prev;
}

std::unique_ptr<EmbeddedManifold> make_manifold(const std::string& kind,
                                                const Vec3& axes,
                                                double proj_tol) {
  if (kind == "sphere" || kind == "unit_sphere")
    return std::make_unique<UnitSphere>(proj_tol);
  if (kind == "ellipsoid")
    return std::make_unique<Ellipsoid>(axes, proj_tol);
  throw Error("unknown manifold kind: " + kind);
}

}  // namespace sulab
