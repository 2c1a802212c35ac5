#include "sulab/oracles.hpp"

#include <cmath>
#include <complex>

namespace sulab {

// w = conj(z)^d orients the covering so the degree integral gives +d.
Vec3 BubbleMap::operator()(Vec2 xy) const {
  std::complex<double> z((xy[0] - center[0]) / lambda, -(xy[1] - center[1]) / lambda);
  std::complex<double> w = z;
  for (int k = 1; k < degree; ++k) w *= z;
  double s = std::norm(w);
  return {2.0 * w.real() / (1.0 + s), 2.0 * w.imag() / (1.0 + s), (s - 1.0) / (1.0 + s)};
}

double BubbleMap::density(Vec2 xy) const {
  double dx = xy[0] - center[0], dy = xy[1] - center[1];
  double r2 = dx * dx + dy * dy;
  double d = lambda * lambda + r2;
  return 8.0 * lambda * lambda / (d * d);
}

namespace {

// 8-point Gauss-Legendre on [-1, 1].
const double kGlx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                        0.7966664774136267,  0.9602898564975363};
const double kGlw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                        0.2223810344533745, 0.1012285362903763};

double gauss8(const std::function<double(double)>& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int k = 0; k < 8; ++k) s += kGlw[k] * f(mid + half * kGlx[k]);
  return s * half;
}

Vec3 rodrigues(const Vec3& axis, double angle, const Vec3& v) {
  double c = std::cos(angle), s = std::sin(angle);
  return c * v + s * cross(axis, v) + ((1.0 - c) * dot(axis, v)) * axis;
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb, double S,
                            double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double Sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double Sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double err = Sl + Sr - S;
  if (std::abs(err) < 15.0 * tol) return Sl + Sr + err / 15.0;
  if (depth <= 0) throw NoConvergence("adaptive Simpson depth exhausted");
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, Sl, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, Sr, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double S = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, S, tol, 40);
}

// Doubling trapezoid over one period; spectrally accurate for smooth f.
double periodic_integral(const std::function<double(double)>& f, double period,
                         double tol) {
  int n = 16;
  auto eval = [&](int m) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += f(period * j / m);
    return s * period / m;
  };
  double prev = eval(n);
  for (int level = 0; level < 16; ++level) {
    n *= 2;
    double cur = eval(n);
    if (std::abs(cur - prev) < tol * (1.0 + std::abs(cur))) return cur;
    prev = cur;
  }
  throw NoConvergence("periodic integral did not settle");
}

}  // namespace

double integrate_annulus(const std::function<double(double, double)>& f_rtheta,
                         double a, double b, double tol) {
  if (!(a > 0.0) || !(b > a)) throw BadRadii("annulus integral needs 0 < a < b");
  auto g = [&](double s) {
    double r = std::exp(s);
    auto ftheta = [&](double th) { return f_rtheta(r, th); };
    return periodic_integral(ftheta, 2.0 * kPi, 0.1 * tol) * r * r;
  };
  return adaptive_simpson(g, std::log(a), std::log(b), tol);
}

double integrate_plane(const std::function<double(double, double)>& f_rtheta,
                       double tol) {
  auto disk_inner = [&](double R) {
    auto g = [&](double r) {
      if (r == 0.0) return 0.0;
      auto ftheta = [&](double th) { return f_rtheta(r, th); };
      return periodic_integral(ftheta, 2.0 * kPi, 0.1 * tol) * r;
    };
    return adaptive_simpson(g, 0.0, R, tol);
  };
  double R = 1.0;
  double disk = disk_inner(R);
  double prev_ext = disk;
  for (int k = 0; k < 40; ++k) {
    double grown = disk + integrate_annulus(f_rtheta, R, 2.0 * R, tol);
    R *= 2.0;
    double ext = grown + (grown - disk) / 3.0;
    disk = grown;
    if (k > 0 && std::abs(ext - prev_ext) < tol * (1.0 + std::abs(ext))) return ext;
    prev_ext = ext;
  }
  throw NoConvergence("plane integral truncation did not settle");
}

MapField synthetic_neck_family(const SyntheticFamilyParams& p, const PolarGrid& grid) {
  if (!(p.lambda > 0.0 && p.lambda < 1.0)) throw Error("family needs 0 < lambda < 1");
  if (!(p.t2 > 0.0 && p.t1 > p.t2 && p.t1 < 1.0))
    throw BandTooNarrow("family band needs 0 < t2 < t1 < 1");
  if (!(p.alpha > 1.0)) throw Error("family needs alpha > 1");
  double ln_lam = std::log(p.lambda);
  double ramp_t = p.blend_logr / std::abs(ln_lam);
  if (p.t1 - p.t2 < 4.0 * ramp_t)
    throw BandTooNarrow("family band shorter than the blend ramps");
  double r_on = std::pow(p.lambda, p.t1), r_off = std::pow(p.lambda, p.t2);
  if (grid.r_min > 0.5 * r_on || grid.r_max < 2.0 * r_off)
    throw BandOutOfRange("grid does not cover the family band");

  Vec3 pole{0.0, 0.0, 1.0};
  Vec3 dir = p.a_dir - dot(p.a_dir, pole) * pole;
  if (norm(dir) < 1e-12) throw Error("family a_dir must have a component tangent at the pole");
  dir = normalized(dir);
  Vec3 axis = normalized(cross(pole, dir));

  double e_hat = BubbleMap::total_energy(p.degree);
  double ln_mu = (2.0 - 2.0 * p.alpha) * ln_lam;
  double sq = std::sqrt(p.alpha - 1.0);
  double amp0 = p.calibrated ? sq * std::sqrt(e_hat / kPi) : sq * p.a_norm;
  double L1 = p.t1 * ln_lam, L2 = p.t2 * ln_lam;  // L1 < L2 < 0 on the ln r axis
  double w2 = 0.5 * p.blend_logr;

  // d psi / d ln r: the calibrated log-profile slope, windowed to the band.
  // The 1/sqrt(1 - sin(chi)^2/2) factor keeps the theta-averaged radial
  // energy on the law through the bubble crossover (chi = bubble polar angle).
  auto slope = [&](double lr) {
    double win = smoothstep(L1 - w2, L1 + w2, lr) * (1.0 - smoothstep(L2 - w2, L2 + w2, lr));
    if (win == 0.0) return 0.0;
    double amp = amp0;
    if (p.calibrated) {
      double t = lr / ln_lam;
      amp *= std::exp((1.0 - t) * ln_mu);
    }
    double schi = std::sin(2.0 * std::atan(std::exp(ln_lam - lr)));
    return win * amp / std::sqrt(1.0 - 0.5 * schi * schi);
  };

  // cumulative rotation angle per ring
  std::vector<double> psi(grid.num_rings(), 0.0);
  for (int i = 1; i <= grid.n_r; ++i) {
    double a = std::log(grid.radii[i - 1]), b = std::log(grid.radii[i]);
    psi[i] = psi[i - 1] + gauss8(slope, a, b);
  }

  BubbleMap bubble{p.lambda, {0.0, 0.0}, p.degree};
  MapField f = make_field(grid);
  for (int i = 0; i <= grid.n_r; ++i) {
    double r = grid.radii[i];
    // Past the band exit the body is constant: fade the O(lambda/r) bubble
    // tail into the pole across the same blend window the rotation uses.
    double fade = smoothstep(L2 - w2, L2 + w2, std::log(r));
    for (int j = 0; j < grid.n_theta; ++j) {
      double th = grid.theta(j);
      Vec3 v = bubble(Vec2{r * std::cos(th), r * std::sin(th)});
      if (fade > 0.0) v = normalized((1.0 - fade) * v + fade * pole);
      f.set(grid.index(i, j), rodrigues(axis, psi[i], v));
    }
  }

  if (p.has_body_value) {
    Vec3 end = rodrigues(axis, psi[grid.n_r], pole);
    Vec3 target = normalized(p.body_value);
    Vec3 ax = cross(end, target);
    double s = norm(ax), c = dot(end, target);
    if (s > 1e-12) {
      double ang = std::atan2(s, c);
      ax = (1.0 / s) * ax;
      int m = f.num_nodes();
      for (int q = 0; q < m; ++q) f.set(q, rodrigues(ax, ang, f.at(q)));
    }
  }
  return f;
}

}  // namespace sulab
