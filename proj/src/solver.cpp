#include "sulab/solver.hpp"

#include <algorithm>
#include <cmath>

#include "sulab/error.hpp"

namespace sulab {

void SolveOptions::validate() const {
  if (max_iters <= 0) throw Error("max_iters must be positive");
  if (!(grad_tol > 0.0)) throw Error("grad_tol must be positive");
  if (!(armijo_c > 0.0) || !(armijo_c < 1.0)) throw Error("armijo_c must be in (0,1)");
  if (!(shrink > 0.0) || !(shrink < 1.0)) throw Error("shrink must be in (0,1)");
  if (!(grow > 1.0)) throw Error("grow must exceed 1");
  if (!(momentum >= 0.0) || !(momentum < 1.0)) throw Error("momentum must be in [0,1)");
  if (step0 < 0.0) throw Error("step0 must be nonnegative");
}

namespace {

// Local CFL-style preconditioner: squared nearest-neighbor spacing / 4.
std::vector<double> local_step_scale(const MapField& u) {
  std::vector<double> s(u.num_nodes());
  if (u.grid_kind == GridKind::Torus) {
    const double v = 0.25 * u.torus.h * u.torus.h;
    std::fill(s.begin(), s.end(), v);
  } else {
    const PolarGrid& g = u.polar;
    for (int i = 0; i <= g.n_r; ++i) {
      const double drad = (i < g.n_r ? g.radii[i + 1] - g.radii[i]
                                     : g.radii[g.n_r] - g.radii[g.n_r - 1]);
      const double dang = g.radii[i] * g.dtheta;
      const double loc = std::min(drad, dang);
      const double v = 0.25 * loc * loc;
      for (int j = 0; j < g.n_theta; ++j) s[g.index(i, j)] = v;
    }
  }
  return s;
}

double weighted_norm(const MapField& u, const std::vector<Vec3>& f) {
  double acc = 0.0;
  for (int q = 0; q < u.num_nodes(); ++q) acc += node_weight(u, q) * norm2(f[q]);
  return std::sqrt(acc);
}

}  // namespace

std::pair<MapField, ConvergenceReport> minimize_alpha_energy(
    const MapField& u0, const EmbeddedManifold& N, double alpha, double epsilon,
    const SolveOptions& opts, const IterCallback& cb) {
  opts.validate();
  MapField u = u0;
  project_field(u, N);
  const int n = u.num_nodes();
  const std::vector<double> pre = local_step_scale(u);

  ConvergenceReport rep;
  rep.energy_history.reserve(std::min(opts.max_iters + 1, 1 << 20));

  const double step_base = opts.step0 > 0.0 ? opts.step0 : 1.0;
  double step = step_base;
  const double step_max = step_base * opts.step_max_factor;
  const double step_min = step_base * opts.step_min_factor;

  std::vector<Vec3> v(n, Vec3{0.0, 0.0, 0.0});
  bool have_v = false;
  MapField trial = u;

  EnergyEval ev = evaluate_energy_gradient(u, alpha, epsilon);
  rep.energy_history.push_back(ev.energy);

  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    // Preconditioned residual direction; fixed nodes stay put.
    std::vector<Vec3> d(n, Vec3{0.0, 0.0, 0.0});
    double gnorm2 = 0.0;
    for (int q = 0; q < n; ++q) {
      if (u.node_fixed(q)) continue;
      const Vec3 g{ev.grad[3 * q], ev.grad[3 * q + 1], ev.grad[3 * q + 2]};
      const Vec3 el = (-1.0 / (2.0 * alpha * node_weight(u, q) *
                               std::max(ev.w[q], 1e-300))) *
                      N.tangent_project(u.at(q), g);
      gnorm2 += node_weight(u, q) * norm2(el);
      d[q] = pre[q] * el;
    }
    const double gnorm = std::sqrt(gnorm2);
    rep.final_grad_norm = gnorm;
    rep.final_energy = ev.energy;
    if (cb && (opts.log_every > 0 && iter % opts.log_every == 0))
      cb(IterStats{iter, alpha, ev.energy, gnorm, step});
    if (gnorm <= opts.grad_tol) {
      rep.converged = true;
      rep.halt_reason = "Converged";
      rep.iters = iter;
      if (cb) cb(IterStats{iter, alpha, ev.energy, gnorm, step});
      return {u, rep};
    }

    // Momentum accumulator, re-tangented at the current iterate.
    if (opts.momentum > 0.0 && have_v) {
      for (int q = 0; q < n; ++q) {
        if (u.node_fixed(q)) { v[q] = {0.0, 0.0, 0.0}; continue; }
        v[q] = d[q] + opts.momentum * N.tangent_project(u.at(q), v[q]);
      }
    } else {
      v = d;
    }
    double slope = 0.0;
    for (int q = 0; q < n; ++q) {
      const Vec3 g{ev.grad[3 * q], ev.grad[3 * q + 1], ev.grad[3 * q + 2]};
      slope += dot(g, v[q]);
    }
    if (!(slope < 0.0)) {  // accumulator turned uphill: restart from plain descent
      v = d;
      slope = 0.0;
      for (int q = 0; q < n; ++q) {
        const Vec3 g{ev.grad[3 * q], ev.grad[3 * q + 1], ev.grad[3 * q + 2]};
        slope += dot(g, v[q]);
      }
    }
    have_v = true;

    // Armijo backtracking on the projected trial point.
    bool accepted = false;
    bool momentum_retry = opts.momentum > 0.0;
    double E_new = ev.energy;
    while (true) {
      for (int q = 0; q < n; ++q) {
        if (u.node_fixed(q)) { trial.set(q, u.at(q)); continue; }
        trial.set(q, N.project(u.at(q) + step * v[q]));
      }
      E_new = alpha_energy_value(trial, alpha, epsilon);
      if (E_new <= ev.energy + opts.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
      if (step < step_min) {
        if (momentum_retry) {  // drop the accumulator once before giving up
          momentum_retry = false;
          v = d;
          slope = 0.0;
          for (int q = 0; q < n; ++q) {
            const Vec3 g{ev.grad[3 * q], ev.grad[3 * q + 1], ev.grad[3 * q + 2]};
            slope += dot(g, v[q]);
          }
          // Restart the search from the base step: the collapse may have been
          // the accumulator's fault, and plain descent from a tiny step can
          // only offer sub-ulp decreases that Armijo cannot certify.
          step = step_base;
          continue;
        }
        break;
      }
    }
    if (!accepted) {
      rep.halt_reason = "LineSearchStall";
      rep.iters = iter;
      if (cb) cb(IterStats{iter, alpha, ev.energy, gnorm, step});
      return {u, rep};
    }
    u.values.swap(trial.values);
    ev = evaluate_energy_gradient(u, alpha, epsilon);
    rep.energy_history.push_back(ev.energy);
    step = std::min(step * opts.grow, step_max);
  }
  rep.halt_reason = "MaxIters";
  rep.iters = iter;
  {
    // Refresh the final residual norm for the report.
    std::vector<Vec3> el(n, Vec3{0.0, 0.0, 0.0});
    for (int q = 0; q < n; ++q) {
      if (u.node_fixed(q)) continue;
      const Vec3 g{ev.grad[3 * q], ev.grad[3 * q + 1], ev.grad[3 * q + 2]};
      el[q] = (-1.0 / (2.0 * alpha * node_weight(u, q) * std::max(ev.w[q], 1e-300))) *
              N.tangent_project(u.at(q), g);
    }
    rep.final_grad_norm = weighted_norm(u, el);
    rep.final_energy = ev.energy;
  }
  if (cb) cb(IterStats{iter, alpha, rep.final_energy, rep.final_grad_norm, step});
  return {u, rep};
}

void ContinuationSchedule::validate() const {
  if (alphas.empty()) throw Error("continuation schedule needs at least one alpha");
  for (size_t k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] > 1.0)) throw Error("schedule alphas must exceed 1");
    if (k > 0 && !(alphas[k] < alphas[k - 1]))
      throw Error("schedule alphas must be strictly decreasing");
  }
  if (!(epsilon >= 0.0)) throw Error("epsilon must be nonnegative");
  if (!(resolution_floor >= 3.0)) throw Error("resolution_floor must be >= 3");
  solve.validate();
}

ContinuationResult continuation_run(const MapField& u0, const EmbeddedManifold& N,
                                    const ContinuationSchedule& sched,
                                    const IterCallback& cb) {
  sched.validate();
  double threshold = sched.grad_threshold;
  if (threshold <= 0.0) {
    threshold = u0.grid_kind == GridKind::Torus ? 10.0 / u0.torus.side
                                                : 10.0 / (2.0 * u0.polar.r_max);
  }
  const double spacing = u0.grid_kind == GridKind::Torus
                             ? u0.torus.h
                             : u0.polar.radii[0] * (u0.polar.rho - 1.0);

  ContinuationResult out;
  MapField u = u0;
  for (size_t stage = 0; stage < sched.alphas.size(); ++stage) {
    const double alpha = sched.alphas[stage];
    auto [umin, rep] = minimize_alpha_energy(u, N, alpha, sched.epsilon, sched.solve, cb);
    u = umin;

    BlowupRecord rec;
    rec.alpha = alpha;
    rec.epsilon = sched.epsilon;
    rec.converged = rep.converged;
    rec.iters = rep.iters;
    rec.final_grad_norm = rep.final_grad_norm;
    const EnergyBreakdown eb = alpha_energy(u, alpha, sched.epsilon);
    rec.total_E_alpha = eb.total;
    rec.dirichlet_E = eb.dirichlet;
    rec.weight_sup = eb.weight_sup;
    const auto site = detect_blowup(u, threshold);
    if (site) {
      rec.has_blowup = true;
      rec.x_alpha = site->x_alpha;
      rec.lambda_alpha = site->lambda_alpha;
      rec.max_grad = site->max_grad;
      auto [mu, nu] = estimate_mu_nu(site->lambda_alpha, alpha);
      rec.mu_hat = mu;
      rec.nu_hat = nu;
      rec.grad_pow = std::pow(site->max_grad, alpha - 1.0);
    }
    if (u.grid_kind == GridKind::Torus && N.kind() == EmbeddedManifold::Kind::UnitSphere) {
      const DegreeResult deg = map_degree(u);
      rec.degree = deg.degree;
      rec.degree_raw = deg.raw;
    }
    out.records.push_back(rec);
    out.fields.push_back(u);
    // Stop early only if stages remain: the grid can no longer resolve lambda.
    if (stage + 1 < sched.alphas.size() && rec.has_blowup &&
        rec.lambda_alpha < sched.resolution_floor * spacing) {
      out.halt_reason = "ResolutionFloor";
      return out;
    }
  }
  out.halt_reason = "ScheduleExhausted";
  return out;
}

}  // namespace sulab
