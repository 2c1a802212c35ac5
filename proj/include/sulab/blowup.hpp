#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "sulab/field.hpp"

namespace sulab {

struct BlowupSite {
  Vec2 x_alpha{0.0, 0.0};  // grid node attaining max |grad u|
  double lambda_alpha = 0.0;  // 1 / max |grad u|
  double max_grad = 0.0;
  int node = -1;
};

// Concentration site, or nothing when max |grad u| stays below the threshold.
std::optional<BlowupSite> detect_blowup(const MapField& u, double grad_threshold);

// mu_hat = lambda^(2-2 alpha), nu_hat = lambda^(-sqrt(alpha-1)); both 1 for a
// non-finite lambda (the no-blow-up sentinel).
std::pair<double, double> estimate_mu_nu(double lambda_alpha, double alpha);

struct DegreeResult {
  int degree = 0;
  double raw = 0.0;
};

// Signed covering count of a torus map into the unit sphere.
DegreeResult map_degree(const MapField& u);

struct BubbleExtract {
  MapField rescaled;  // u(x_alpha + lambda_alpha y) on a polar patch in y
  double R = 0.0;
  double energy_in_R = 0.0;      // Dirichlet energy of the rescaled patch
  double comparison_error = std::numeric_limits<double>::quiet_NaN();
  double fitted_scale = 0.0;     // best-fit bubble scale in y units
  bool is_bubble = false;        // comparison_error < 0.25
};

BubbleExtract rescale_bubble(const MapField& u, Vec2 x_alpha, double lambda_alpha,
                             double R);

enum class SeparationClass { H1, H2, SameBubble };

struct SeparationPair {
  int i = 0, j = 0;
  SeparationClass cls = SeparationClass::H1;
};

std::vector<SeparationPair> check_bubble_separation(
    const std::vector<BlowupSite>& sites, double R, double ratio_threshold);

struct BlowupRecord {
  double alpha = 1.0;
  double epsilon = 1.0;
  bool has_blowup = false;
  Vec2 x_alpha{0.0, 0.0};
  double lambda_alpha = std::numeric_limits<double>::infinity();
  double max_grad = 0.0;
  double mu_hat = 1.0;
  double nu_hat = 1.0;
  double grad_pow = 1.0;  // (max |grad u|)^(alpha-1)
  double total_E_alpha = 0.0;
  double dirichlet_E = 0.0;
  double weight_sup = 1.0;
  int degree = 0;
  double degree_raw = 0.0;
  double bubble_energy_hat = std::numeric_limits<double>::quiet_NaN();
  double bubble_error = std::numeric_limits<double>::quiet_NaN();
  double neck_residual = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int iters = 0;
  double final_grad_norm = 0.0;
};

struct EnergyIdentityRow {
  double alpha = 1.0;
  double E_alpha = 0.0;
  double mu_hat = 1.0;
  double nu_hat = 1.0;
  double defect = 0.0;
  double rel_defect = 0.0;
};

struct EnergyIdentityTable {
  std::vector<EnergyIdentityRow> rows;
  double defect_trend = 0.0;   // least-squares slope of |defect| over the schedule
  double nu_log_slope = 0.0;   // fit of log nu_hat against sqrt(alpha-1), labeled
                               // an extrapolation in reports
};

// defect_alpha = E_alpha - base_energy - region_measure - mu_hat^2 * bubble_energy
// (the bubble term is dropped for records without blow-up).
EnergyIdentityTable energy_identity_report(const std::vector<BlowupRecord>& records,
                                           double bubble_energy, double base_energy,
                                           double region_measure);

}  // namespace sulab
