#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sulab/blowup.hpp"
#include "sulab/energy.hpp"
#include "sulab/field.hpp"

namespace sulab {

struct SolveOptions {
  int max_iters = 20000;
  double grad_tol = 1e-8;      // on the weighted L2 norm of the residual field
  double step0 = 0.0;          // 0 = pick from the finest grid spacing
  double step_max_factor = 1e4;  // cap relative to the auto step
  double step_min_factor = 1e-12;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double grow = 1.3;
  double momentum = 0.9;  // 0 disables the accumulator
  int log_every = 0;      // 0 = no periodic callbacks

  void validate() const;
};

struct IterStats {
  int iter = 0;
  double alpha = 1.0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

using IterCallback = std::function<void(const IterStats&)>;

struct ConvergenceReport {
  bool converged = false;
  int iters = 0;
  double final_energy = 0.0;
  double final_grad_norm = 0.0;
  std::string halt_reason;  // Converged | MaxIters | LineSearchStall
  std::vector<double> energy_history;
};

// Projected gradient descent on the alpha-energy: move along the (momentum
// averaged) residual field, project back onto the target pointwise, accept by
// Armijo backtracking. Energy never increases.
std::pair<MapField, ConvergenceReport> minimize_alpha_energy(
    const MapField& u0, const EmbeddedManifold& N, double alpha, double epsilon,
    const SolveOptions& opts, const IterCallback& cb = nullptr);

struct ContinuationSchedule {
  std::vector<double> alphas;  // strictly decreasing toward 1
  double epsilon = 1.0;
  double grad_threshold = 0.0;  // 0 = 10 / (finest spacing... ) set per grid
  double resolution_floor = 3.0;  // halt when lambda < floor * spacing
  SolveOptions solve;

  void validate() const;
};

struct ContinuationResult {
  std::vector<BlowupRecord> records;
  std::vector<MapField> fields;  // minimizer at each completed alpha
  std::string halt_reason;       // ScheduleExhausted | ResolutionFloor
};

// Warm-started minimization down the alpha schedule with blow-up monitoring.
ContinuationResult continuation_run(const MapField& u0, const EmbeddedManifold& N,
                                    const ContinuationSchedule& sched,
                                    const IterCallback& cb = nullptr);

}  // namespace sulab
