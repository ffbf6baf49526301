#pragma once

#include <optional>
#include <string>
#include <vector>

#include "einglue/gluing.hpp"

namespace einglue::estimates {

// One scenario: a hyperbolic manifold with a codimension-two totally geodesic
// submanifold of diameter diam_sigma and normal injectivity radius R_nu, and
// a choice of branch degree d. Lengths in hyperbolic units.
struct ScenarioInputs {
  int n = 0;
  int d = 2;
  double R_nu = 0.0;
  double diam_sigma = 0.0;
  std::optional<double> vol_sigma;         // direct (n-2)-volume, if known
  std::optional<double> vol_cap_constant;  // C in vol <= C exp((n-3) diam)

  // Either the given volume or the diameter cap C exp((n-3) diam); C defaults
  // to the volume of the euclidean unit (n-2)-ball.
  double vol_sigma_cap() const;
  double log_vol_sigma_cap() const;
  std::string vol_cap_provenance() const;
};

double unit_ball_volume(int m);

struct DerivedParams {
  double U_max = 0.0;   // cosh(R_nu); +inf past the double range
  double U_glue = 0.0;  // sqrt(U_max)
  double log_U_max = 0.0;
  double log_U_glue = 0.0;
};

// U_max = cosh(R_nu), U_glue = sqrt(U_max). Requires cosh(R_nu) > 4 so that
// U_glue < U_max / 2. Logs are carried alongside so scenario chains stay
// finite for R_nu far beyond the overflow point of cosh.
DerivedParams derive_parameters(const ScenarioInputs& s);

struct L2Chain {
  double l2_bound = 0.0;  // measured_sup^2 * gluing_volume (0 on underflow)
  double log_l2_bound = 0.0;
  double gluing_volume = 0.0;  // measured_C_vol * U_glue^{n-1} * vol_sigma_cap
  double log_gluing_volume = 0.0;
  double epsilon = 0.0;       // 2 (n-3) diam_sigma / R_nu
  double net_exponent = 0.0;  // -(n-1) + epsilon
  bool decay_certified = false;
};

// Combines a measured sup-norm bound with the volume bound of the gluing
// region. All products are taken in log space. epsilon >= n-1 is reported as
// decay_certified = false, not as an error.
L2Chain l2_bound_chain(const ScenarioInputs& s, double measured_sup, double measured_C_vol);

// Integral of |E|^2 over the gluing region: 2 pi d vol_sigma *
// Int_{U/2}^{U} |E(u)|^2 u^{n-2} du with the frame norm of the glued profile.
double l2_numeric(const gluing::GluedMetricSpec& spec, double vol_sigma);

struct EstimateReport {
  ScenarioInputs inputs;
  DerivedParams params;
  double sup_error = 0.0;       // measured over the gluing band
  double C_sup = 0.0;           // sup_error * U_glue^{n-1}
  double measured_C_vol = 0.0;  // region volume / (U_glue^{n-1} vol)
  double vol_sigma_cap = 0.0;
  std::string vol_cap_provenance;
  L2Chain chain;
  double l2_numeric_value = 0.0;
  bool l2_numeric_computed = false;
};

EstimateReport scenario_report(const ScenarioInputs& s, int sup_samples = 1000);

// One report per scenario, computed in parallel, merged in input order.
std::vector<EstimateReport> convergence_table(const std::vector<ScenarioInputs>& seq,
                                              int sup_samples = 1000);

// JSON I/O: array of {n, d, R_nu, diam_sigma, vol_sigma | vol_cap_constant}.
std::vector<ScenarioInputs> read_scenarios_json(const std::string& text);
std::vector<ScenarioInputs> read_scenarios_file(const std::string& path);
std::string table_to_json(const std::vector<EstimateReport>& rows);
std::string table_to_csv(const std::vector<EstimateReport>& rows);

}  // namespace einglue::estimates
