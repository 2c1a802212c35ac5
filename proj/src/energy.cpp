#include "sulab/energy.hpp"

#include <cmath>

#include "sulab/error.hpp"
#include "sulab/parallel.hpp"

namespace sulab {

namespace {

void torus_derivatives(const MapField& u, DerivField& out) {
  const TorusGrid& g = u.torus;
  const int n = g.n;
  const double inv2h = 1.0 / (2.0 * g.h);
  parallel_for(0, n, [&](int i) {
    const int ip = (i + 1) % n, im = (i + n - 1) % n;
    for (int j = 0; j < n; ++j) {
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      const int q = g.index(i, j);
      const Vec3 ux = inv2h * (u.at(g.index(ip, j)) - u.at(g.index(im, j)));
      const Vec3 uy = inv2h * (u.at(g.index(i, jp)) - u.at(g.index(i, jm)));
      out.da[q] = ux;
      out.db[q] = uy;
      out.D[q] = norm2(ux) + norm2(uy);
    }
  });
}

void polar_derivatives(const MapField& u, DerivField& out) {
  const PolarGrid& g = u.polar;
  const int nt = g.n_theta;
  const double inv2t = 1.0 / (2.0 * g.dtheta);
  parallel_for(0, g.n_r + 1, [&](int i) {
    const Stencil3 s = g.radial_stencil(i);
    const double invr = 1.0 / g.radii[i];
    for (int j = 0; j < nt; ++j) {
      const int q = g.index(i, j);
      const Vec3 ur = s.ca * u.at(g.index(s.ia, j)) + s.cb * u.at(g.index(s.ib, j)) +
                      s.cc * u.at(g.index(s.ic, j));
      const Vec3 ut =
          (inv2t * invr) * (u.at(g.index(i, (j + 1) % nt)) - u.at(g.index(i, (j + nt - 1) % nt)));
      out.da[q] = ur;
      out.db[q] = ut;
      out.D[q] = norm2(ur) + norm2(ut);
    }
  });
}

}  // namespace

DerivField derivatives(const MapField& u) {
  DerivField out;
  const int n = u.num_nodes();
  out.da.resize(n);
  out.db.resize(n);
  out.D.resize(n);
  if (u.grid_kind == GridKind::Torus)
    torus_derivatives(u, out);
  else
    polar_derivatives(u, out);
  return out;
}

double node_weight(const MapField& u, int node) {
  if (u.grid_kind == GridKind::Torus) return u.torus.node_weight();
  const int nt = u.polar.n_theta;
  return u.polar.node_weight(node / nt);
}

EnergyBreakdown alpha_energy(const MapField& u, double alpha, double epsilon) {
  if (!(alpha >= 1.0)) throw Error("alpha must be >= 1");
  if (!(epsilon >= 0.0)) throw Error("epsilon must be >= 0");
  const DerivField d = derivatives(u);
  EnergyBreakdown out;
  out.alpha = alpha;
  out.epsilon = epsilon;
  const int n = u.num_nodes();
  out.density.resize(n);
  double total = 0.0, dir = 0.0, rad = 0.0, ang = 0.0, wsup = 0.0;
  for (int q = 0; q < n; ++q) {
    const double W = node_weight(u, q);
    const double base = epsilon + d.D[q];
    const double w = std::pow(base, alpha - 1.0);
    const double dens = w * base;
    if (!std::isfinite(dens)) throw NonFiniteValue("energy density is not finite");
    out.density[q] = dens;
    total += W * dens;
    dir += W * d.D[q];
    rad += W * w * norm2(d.da[q]);
    ang += W * w * norm2(d.db[q]);
    if (w > wsup) wsup = w;
  }
  out.total = total;
  out.dirichlet = dir;
  if (u.grid_kind == GridKind::Polar) {
    out.radial = rad;
    out.angular = ang;
  }
  out.weight_sup = wsup;
  return out;
}

double alpha_energy_value(const MapField& u, double alpha, double epsilon) {
  const DerivField d = derivatives(u);
  double total = 0.0;
  const int n = u.num_nodes();
  if (u.grid_kind == GridKind::Torus) {
    const double W = u.torus.node_weight();
    for (int q = 0; q < n; ++q) total += std::pow(epsilon + d.D[q], alpha);
    total *= W;
  } else {
    const int nt = u.polar.n_theta;
    for (int q = 0; q < n; ++q)
      total += u.polar.node_weight(q / nt) * std::pow(epsilon + d.D[q], alpha);
  }
  if (!std::isfinite(total)) throw NonFiniteValue("energy is not finite");
  return total;
}

EnergyEval evaluate_energy_gradient(const MapField& u, double alpha, double epsilon) {
  const DerivField d = derivatives(u);
  const int n = u.num_nodes();
  EnergyEval out;
  out.w.resize(n);
  out.grad.assign(static_cast<size_t>(n) * 3, 0.0);
  auto add = [&out](int q, const Vec3& v) {
    out.grad[3 * q + 0] += v[0];
    out.grad[3 * q + 1] += v[1];
    out.grad[3 * q + 2] += v[2];
  };
  double total = 0.0;
  if (u.grid_kind == GridKind::Torus) {
    const TorusGrid& g = u.torus;
    const int nn = g.n;
    const double W = g.node_weight();
    const double inv2h = 1.0 / (2.0 * g.h);
    for (int i = 0; i < nn; ++i) {
      const int ip = (i + 1) % nn, im = (i + nn - 1) % nn;
      for (int j = 0; j < nn; ++j) {
        const int jp = (j + 1) % nn, jm = (j + nn - 1) % nn;
        const int q = g.index(i, j);
        const double base = epsilon + d.D[q];
        const double w = std::pow(base, alpha - 1.0);
        out.w[q] = w;
        total += W * w * base;
        const double f = W * alpha * w * 2.0;
        const Vec3 gx = (f * inv2h) * d.da[q];
        const Vec3 gy = (f * inv2h) * d.db[q];
        add(g.index(ip, j), gx);
        add(g.index(im, j), -1.0 * gx);
        add(g.index(i, jp), gy);
        add(g.index(i, jm), -1.0 * gy);
      }
    }
  } else {
    const PolarGrid& g = u.polar;
    const int nt = g.n_theta;
    const double inv2t = 1.0 / (2.0 * g.dtheta);
    for (int i = 0; i <= g.n_r; ++i) {
      const Stencil3 s = g.radial_stencil(i);
      const double invr = 1.0 / g.radii[i];
      const double W = g.node_weight(i);
      for (int j = 0; j < nt; ++j) {
        const int q = g.index(i, j);
        const double base = epsilon + d.D[q];
        const double w = std::pow(base, alpha - 1.0);
        out.w[q] = w;
        total += W * w * base;
        const double f = W * alpha * w * 2.0;
        const Vec3 gr = f * d.da[q];
        add(g.index(s.ia, j), s.ca * gr);
        add(g.index(s.ib, j), s.cb * gr);
        add(g.index(s.ic, j), s.cc * gr);
        const Vec3 gt = (f * inv2t * invr) * d.db[q];
        add(g.index(i, (j + 1) % nt), gt);
        add(g.index(i, (j + nt - 1) % nt), -1.0 * gt);
      }
    }
  }
  if (!std::isfinite(total)) throw NonFiniteValue("energy is not finite");
  out.energy = total;
  return out;
}

std::vector<double> ambient_energy_gradient(const MapField& u, double alpha,
                                            double epsilon) {
  return evaluate_energy_gradient(u, alpha, epsilon).grad;
}

std::vector<Vec3> el_residual_field(const MapField& u, const EmbeddedManifold& N,
                                    double alpha, double epsilon, int mask_rings) {
  const EnergyEval ev = evaluate_energy_gradient(u, alpha, epsilon);
  const int n = u.num_nodes();
  std::vector<Vec3> el(n, Vec3{0.0, 0.0, 0.0});
  const int nt = (u.grid_kind == GridKind::Polar) ? u.polar.n_theta : 0;
  const int nr = (u.grid_kind == GridKind::Polar) ? u.polar.n_r : 0;
  for (int q = 0; q < n; ++q) {
    if (u.node_fixed(q)) continue;
    if (u.grid_kind == GridKind::Polar) {
      const int ring = q / nt;
      if (ring < mask_rings || ring > nr - mask_rings) continue;
    }
    const Vec3 g{ev.grad[3 * q], ev.grad[3 * q + 1], ev.grad[3 * q + 2]};
    const Vec3 p = N.project(u.at(q));
    const double W = node_weight(u, q);
    el[q] = (-1.0 / (2.0 * alpha * W * std::max(ev.w[q], 1e-300))) *
            N.tangent_project(p, g);
  }
  return el;
}

ElResidual el_residual(const MapField& u, const EmbeddedManifold& N, double alpha,
                       double epsilon) {
  const std::vector<Vec3> el = el_residual_field(u, N, alpha, epsilon, 3);
  ElResidual out;
  double acc = 0.0;
  for (int q = 0; q < u.num_nodes(); ++q) {
    const double m = norm(el[q]);
    if (m > out.sup) out.sup = m;
    acc += node_weight(u, q) * m * m;
  }
  out.l2 = std::sqrt(acc);
  if (!std::isfinite(out.l2)) throw NonFiniteValue("el residual is not finite");
  return out;
}

std::vector<Vec3> alpha_energy_gradient(const MapField& u, const EmbeddedManifold& N,
                                        double alpha, double epsilon) {
  const EnergyEval ev = evaluate_energy_gradient(u, alpha, epsilon);
  const int n = u.num_nodes();
  std::vector<Vec3> out(n);
  for (int q = 0; q < n; ++q) {
    const Vec3 g{ev.grad[3 * q], ev.grad[3 * q + 1], ev.grad[3 * q + 2]};
    out[q] = N.tangent_project(N.project(u.at(q)), g);
  }
  return out;
}

}  // namespace sulab
