#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "einglue/cutoff.hpp"

namespace einglue::profiles {

struct ProfileEval {
  double V = 0.0;
  double Vp = 0.0;
  double Vpp = 0.0;
};

// Deviation from the hyperbolic profile: D = V - (u^2 - 1) with derivatives.
// Evaluated natively per profile kind, so it stays accurate when |D| is many
// orders of magnitude below u^2 (where V - (u^2-1) would lose every digit).
struct DeviationEval {
  double D = 0.0;
  double Dp = 0.0;
  double Dpp = 0.0;
};

// Radial profile V(u) of the cohomogeneity-one ansatz
//   g = du^2/V + V dtheta^2 + u^2 g_S.
// Three kinds:
//   hyperbolic   V = u^2 - 1                          (exact)
//   model(a)     V = u^2 - 1 + a u^{3-n}              (Einstein family)
//   glued(a,chi) V = u^2 - 1 + a u^{3-n} chi(u)       (interpolation)
class ProfileSpec {
 public:
  enum class Kind { Hyperbolic, Model, Glued };

  static ProfileSpec hyperbolic(int n);
  static ProfileSpec model(int n, double a);
  static ProfileSpec glued(int n, double a, const gluing::CutoffSpec& cutoff);

  ProfileEval eval(double u) const;
  DeviationEval deviation(double u) const;

  Kind kind() const { return kind_; }
  int dim() const { return n_; }
  double a() const { return a_; }
  // Largest u at/below which V reaches 0: u_a for model/glued, 1 for the
  // hyperbolic profile. eval is finite for all u > domain_lower.
  double domain_lower() const { return domain_lower_; }
  const gluing::CutoffSpec& cutoff() const { return cutoff_; }

 private:
  ProfileSpec(Kind k, int n, double a, double lo, gluing::CutoffSpec cut)
      : kind_(k), n_(n), a_(a), domain_lower_(lo), cutoff_(cut) {}

  Kind kind_;
  int n_;
  double a_;
  double domain_lower_;
  gluing::CutoffSpec cutoff_;
};

// Einstein family parameters (n, a) with the largest root of V_a.
struct ModelParams {
  int n = 0;
  double a = 0.0;
  double u_a = 0.0;
};

// Solution of the cone-angle matching problem: angle(a(d)) = 2*pi/d.
struct ConeAngleSolution {
  int d = 0;
  double a_of_d = 0.0;
  double u_of_d = 0.0;
  // |V(u)| and |V'(u) - 2/d| at the returned point
  std::array<double, 2> residuals{0.0, 0.0};
};

struct SolverError : std::runtime_error {
  SolverError(const std::string& msg, double a, double u)
      : std::runtime_error(msg), last_a(a), last_u(u) {}
  double last_a;
  double last_u;
};

// V, V', V'' of the model profile V_a(u) = u^2 - 1 + a u^{3-n}.
ProfileEval eval_model_profile(int n, double a, double u);

// Double-root parameters: v = sqrt((n-3)/(n-1)), a_max = 2 v^{n-1}/(n-3).
// V_{a_max}(v) = V'_{a_max}(v) = 0; no positive root exists for a > a_max.
std::pair<double, double> a_max_and_v(int n);  // (a_max, v)

// Largest zero u_a of V_a. Bisection on [v, |a|+2], then Newton polish.
double largest_root(int n, double a);

// Cone angle of the model metric along the core at u = u_a: pi * V'(u_a).
double cone_angle(int n, double a);

// Finds a(d) with cone angle 2*pi/d by Newton continuation in d on the
// system (V_a(u) = 0, V_a'(u) = 2/d).
ConeAngleSolution solve_cone_angle(int n, int d);

}  // namespace einglue::profiles
