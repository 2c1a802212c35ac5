#include "sulab/blowup.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "sulab/energy.hpp"
#include "sulab/error.hpp"
#include "sulab/oracles.hpp"

namespace sulab {

std::optional<BlowupSite> detect_blowup(const MapField& u, double grad_threshold) {
  const DerivField d = derivatives(u);
  int best = 0;
  for (int q = 1; q < u.num_nodes(); ++q)
    if (d.D[q] > d.D[best]) best = q;
  const double g = std::sqrt(d.D[best]);
  if (!(g >= grad_threshold)) return std::nullopt;
  BlowupSite site;
  site.node = best;
  site.max_grad = g;
  site.lambda_alpha = 1.0 / g;
  if (u.grid_kind == GridKind::Torus)
    site.x_alpha = u.torus.position(best / u.torus.n, best % u.torus.n);
  else
    site.x_alpha = u.polar.position(best / u.polar.n_theta, best % u.polar.n_theta);
  return site;
}

std::pair<double, double> estimate_mu_nu(double lambda_alpha, double alpha) {
  if (!std::isfinite(lambda_alpha)) return {1.0, 1.0};
  if (!(lambda_alpha > 0.0)) throw Error("lambda must be positive");
  const double mu = std::pow(lambda_alpha, 2.0 - 2.0 * alpha);
  const double nu = std::pow(lambda_alpha, -std::sqrt(std::max(alpha - 1.0, 0.0)));
  return {mu, nu};
}

DegreeResult map_degree(const MapField& u) {
  if (u.grid_kind != GridKind::Torus) throw Error("map_degree needs a torus field");
  const DerivField d = derivatives(u);
  double acc = 0.0;
  for (int q = 0; q < u.num_nodes(); ++q)
    acc += dot(u.at(q), cross(d.da[q], d.db[q]));
  DegreeResult out;
  out.raw = acc * u.torus.node_weight() / (4.0 * kPi);
  const long nearest = std::lround(out.raw);
  if (std::abs(out.raw - nearest) > 0.2)
    throw DegreeAmbiguous("degree integral is not close to an integer");
  out.degree = static_cast<int>(nearest);
  return out;
}

namespace {

// Best proper rotation taking model points b to samples s under weights W.
Eigen::Matrix3d kabsch(const std::vector<Vec3>& s, const std::vector<Vec3>& b,
                       const std::vector<double>& W) {
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  for (size_t q = 0; q < s.size(); ++q)
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) M(a, c) += W[q] * s[q][a] * b[q][c];
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d U = svd.matrixU(), V = svd.matrixV();
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  D(2, 2) = (U * V.transpose()).determinant() < 0 ? -1.0 : 1.0;
  return U * D * V.transpose();
}

// Weighted L2 misfit of the best rotation of a scale-sigma bubble.
double bubble_misfit(const std::vector<Vec3>& s, const std::vector<Vec2>& pos,
                     const std::vector<double>& W, double sigma) {
  BubbleMap model;
  model.lambda = sigma;
  std::vector<Vec3> b(pos.size());
  for (size_t q = 0; q < pos.size(); ++q) b[q] = model(pos[q]);
  const Eigen::Matrix3d R = kabsch(s, b, W);
  double num = 0.0, Wsum = 0.0;
  Vec3 mean{0.0, 0.0, 0.0};
  for (size_t q = 0; q < pos.size(); ++q) {
    mean += W[q] * b[q];
    Wsum += W[q];
  }
  mean = (1.0 / Wsum) * mean;
  double den = 0.0;
  for (size_t q = 0; q < pos.size(); ++q) {
    Eigen::Vector3d bv(b[q][0], b[q][1], b[q][2]);
    Eigen::Vector3d rb = R * bv;
    const Vec3 rbv{rb[0], rb[1], rb[2]};
    num += W[q] * norm2(s[q] - rbv);
    den += W[q] * norm2(b[q] - mean);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

BubbleExtract rescale_bubble(const MapField& u, Vec2 x_alpha, double lambda_alpha,
                             double R) {
  if (!(R > 1.0)) throw Error("rescale radius R must exceed 1");
  if (!std::isfinite(lambda_alpha) || !(lambda_alpha > 0.0))
    throw Error("rescale needs a finite positive lambda");
  double spacing;
  if (u.grid_kind == GridKind::Torus) {
    spacing = u.torus.h;
    if (R * lambda_alpha > 0.5 * u.torus.side)
      throw PatchOutOfBounds("rescale patch exceeds half the torus side");
  } else {
    const int i = u.polar.nearest_ring(std::min(
        std::max(lambda_alpha, u.polar.r_min), u.polar.r_max));
    spacing = u.polar.radii[i] * (u.polar.rho - 1.0);
    const double rc = norm(Vec3{x_alpha[0] - u.polar.center[0],
                                x_alpha[1] - u.polar.center[1], 0.0});
    if (rc + R * lambda_alpha > u.polar.r_max)
      throw PatchOutOfBounds("rescale patch leaves the annulus");
  }
  if (R * lambda_alpha < 4.0 * spacing)
    throw BelowResolution("rescale patch spans fewer than 4 cells");

  PolarGrid patch({0.0, 0.0}, 0.01, R, 96, 192);
  BubbleExtract out;
  out.R = R;
  out.rescaled = make_field(patch);
  const int nt = patch.n_theta;
  std::vector<Vec3> samples(out.rescaled.num_nodes());
  std::vector<Vec2> pos(out.rescaled.num_nodes());
  std::vector<double> W(out.rescaled.num_nodes());
  for (int i = 0; i <= patch.n_r; ++i) {
    for (int j = 0; j < nt; ++j) {
      const int q = patch.index(i, j);
      const Vec2 y = patch.position(i, j);
      const Vec2 p{x_alpha[0] + lambda_alpha * y[0], x_alpha[1] + lambda_alpha * y[1]};
      Vec3 v;
      if (u.grid_kind == GridKind::Torus) {
        v = torus_bilinear(u, p);
      } else {
        const double dx = p[0] - u.polar.center[0], dy = p[1] - u.polar.center[1];
        const double r = std::sqrt(dx * dx + dy * dy);
        if (r < u.polar.r_min || r > u.polar.r_max)
          throw PatchOutOfBounds("rescale patch leaves the annulus");
        v = polar_bilinear(u, r, std::atan2(dy, dx));
      }
      const double m = norm(v);
      if (m > 1e-12) v = (1.0 / m) * v;  // comparisons are against sphere bubbles
      out.rescaled.set(q, v);
      samples[q] = v;
      pos[q] = y;
      W[q] = patch.node_weight(i);
    }
  }
  out.energy_in_R = alpha_energy(out.rescaled, 1.0, 1.0).dirichlet;

  // Golden-section search on log sigma; rotation fitted inside the misfit.
  double lo = std::log(0.2), hi = std::log(16.0);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = bubble_misfit(samples, pos, W, std::exp(x1));
  double f2 = bubble_misfit(samples, pos, W, std::exp(x2));
  for (int it = 0; it < 60; ++it) {
    if (f1 <= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = bubble_misfit(samples, pos, W, std::exp(x1));
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = bubble_misfit(samples, pos, W, std::exp(x2));
    }
  }
  out.fitted_scale = std::exp(f1 <= f2 ? x1 : x2);
  out.comparison_error = std::min(f1, f2);
  out.is_bubble = out.comparison_error < 0.25;
  return out;
}

std::vector<SeparationPair> check_bubble_separation(
    const std::vector<BlowupSite>& sites, double R, double ratio_threshold) {
  std::vector<SeparationPair> out;
  for (size_t i = 0; i < sites.size(); ++i) {
    for (size_t j = i + 1; j < sites.size(); ++j) {
      SeparationPair p;
      p.i = static_cast<int>(i);
      p.j = static_cast<int>(j);
      const double dx = sites[i].x_alpha[0] - sites[j].x_alpha[0];
      const double dy = sites[i].x_alpha[1] - sites[j].x_alpha[1];
      const double dist = std::sqrt(dx * dx + dy * dy);
      const double li = sites[i].lambda_alpha, lj = sites[j].lambda_alpha;
      if (dist > R * (li + lj)) {
        p.cls = SeparationClass::H1;
      } else {
        const double ratio = std::max(li, lj) / std::min(li, lj);
        p.cls = ratio > ratio_threshold ? SeparationClass::H2
                                        : SeparationClass::SameBubble;
      }
      out.push_back(p);
    }
  }
  return out;
}

EnergyIdentityTable energy_identity_report(const std::vector<BlowupRecord>& records,
                                           double bubble_energy, double base_energy,
                                           double region_measure) {
  EnergyIdentityTable table;
  table.rows.reserve(records.size());
  for (const BlowupRecord& rec : records) {
    EnergyIdentityRow row;
    row.alpha = rec.alpha;
    row.E_alpha = rec.total_E_alpha;
    row.mu_hat = rec.mu_hat;
    row.nu_hat = rec.nu_hat;
    double predicted = base_energy + region_measure;
    if (rec.has_blowup) predicted += rec.mu_hat * rec.mu_hat * bubble_energy;
    row.defect = rec.total_E_alpha - predicted;
    row.rel_defect = row.defect / std::max(std::abs(rec.total_E_alpha), 1e-8);
    table.rows.push_back(row);
  }
  const int m = static_cast<int>(table.rows.size());
  if (m >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < m; ++k) {
      const double y = std::abs(table.rows[k].defect);
      sx += k; sy += y; sxx += double(k) * k; sxy += k * y;
    }
    table.defect_trend = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  double sxx = 0, sxy = 0;
  for (const BlowupRecord& rec : records) {
    if (!rec.has_blowup || !(rec.alpha > 1.0)) continue;
    const double x = std::sqrt(rec.alpha - 1.0);
    sxx += x * x;
    sxy += x * std::log(rec.nu_hat);
  }
  if (sxx > 0) table.nu_log_slope = sxy / sxx;
  return table;
}

}  // namespace sulab
