#pragma once

#include <optional>
#include <vector>

#include "einglue/geometry.hpp"
#include "einglue/profiles.hpp"

namespace einglue::gluing {

// The interpolated metric: model Einstein profile with parameter a = a(d)
// inside {u <= U_glue/2}, hyperbolic outside {u >= U_glue}.
struct GluedMetricSpec {
  int n = 0;
  int d = 1;
  double a = 0.0;      // a(d) from the cone-angle matching
  double u_a = 0.0;    // largest root of V_a
  double U_glue = 0.0;
  CutoffSpec cutoff;

  // Solves the matching problem for (n, d) and attaches the standard cutoff
  // band [U_glue/2, U_glue].
  static GluedMetricSpec make(int n, int d, double U_glue);
};

profiles::ProfileSpec glued_profile(const GluedMetricSpec& spec);

struct SupportCheck {
  bool support_ok = false;
  double max_err_inner = 0.0;  // max |E| on [u_a, U_glue/2]
  double max_err_outer = 0.0;  // max |E| on [U_glue, 4 U_glue]
  double witness_inner = 0.0;
  double witness_outer = 0.0;
};

// Verifies that the Einstein error of the glued metric vanishes (|E| < 1e-10)
// outside the transition band.
SupportCheck error_support_check(const GluedMetricSpec& spec, int samples = 1000);

// Max of |E| (frame norm) over the band [U_glue/2, U_glue], sampled
// log-uniformly.
double error_sup_norm(const GluedMetricSpec& spec, int samples = 1000);

// Least-squares slope of log sup|E| against log U_glue over a family of
// specs; expected close to -(n-1).
double decay_exponent_fit(const std::vector<GluedMetricSpec>& family, int samples = 1000);

struct NegativityCertificate {
  double max_sec = 0.0;
  double witness_u = 0.0;
  // Empirical threshold: smallest U_glue (found by bisection) at which all
  // sectional curvatures on [u_a, 2 U_glue] are still negative; nullopt when
  // negativity holds at the given U_glue for every admissible smaller value,
  // or when it fails at U_glue itself.
  std::optional<double> min_required_Uglue;
};

NegativityCertificate negativity_certificate(const GluedMetricSpec& spec, double u_cap,
                                             int samples = 4000);

// Shape constants of the frozen cutoff: suprema of |psi'| and |psi''| on
// [0, 1], measured on a dense grid. sup|chi'| = K1/(U_glue/2) and
// sup|chi''| = K2/(U_glue/2)^2 for every U_glue.
std::pair<double, double> cutoff_shape_constants(int samples = 200001);

}  // namespace einglue::gluing
