#include "einglue/profiles.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace einglue::profiles {

namespace {

void require_dim(int n) {
  if (n < 4) throw std::domain_error("dimension must satisfy n >= 4");
}

}  // namespace

ProfileEval eval_model_profile(int n, double a, double u) {
  require_dim(n);
  if (!(u > 0.0)) throw std::domain_error("model profile requires u > 0");
  const double m = static_cast<double>(3 - n);
  const double w = std::pow(u, m);
  ProfileEval e;
  e.V = u * u - 1.0 + a * w;
  e.Vp = 2.0 * u + m * a * w / u;
  e.Vpp = 2.0 + m * (m - 1.0) * a * w / (u * u);
  return e;
}

std::pair<double, double> a_max_and_v(int n) {
  require_dim(n);
  const double v = std::sqrt(static_cast<double>(n - 3) / static_cast<double>(n - 1));
  const double a_max = 2.0 * std::pow(v, n - 1) / static_cast<double>(n - 3);
  return {a_max, v};
}

double largest_root(int n, double a) {
  require_dim(n);
  const auto [a_max, v] = a_max_and_v(n);
  if (a > a_max * (1.0 + 1e-14))
    throw std::domain_error("no positive root: a exceeds a_max(n)");
  if (a == 0.0) return 1.0;

  // V(v) <= 0 <= V(|a|+2): V(v) = -2/(n-1) + a v^{3-n} rises to 0 exactly at
  // a = a_max, and V(u) >= u^2 - 1 - |a| for u >= 1.
  double lo = v, hi = std::abs(a) + 2.0;
  auto val = [&](double u) { return eval_model_profile(n, a, u).V; };
  double flo = val(lo);
  if (flo > 0.0) return v;  // a == a_max up to rounding: double root at v
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (val(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double u = 0.5 * (lo + hi);
  // Newton polish; near the double root V' is tiny, so keep the bisection
  // value whenever a step would leave [lo, hi].
  for (int it = 0; it < 8; ++it) {
    const ProfileEval e = eval_model_profile(n, a, u);
    if (e.Vp == 0.0) break;
    const double step = e.V / e.Vp;
    const double next = u - step;
    if (!(next >= lo && next <= hi)) break;
    u = next;
    if (std::abs(step) < 1e-16 * u) break;
  }
  return u;
}

double cone_angle(int n, double a) {
  const double u_a = largest_root(n, a);
  return M_PI * eval_model_profile(n, a, u_a).Vp;
}

namespace {

// One-parameter form along the root locus V_a(u) = 0: a = (1 - u^2) u^{n-3},
// V'(u) = 2u - (n-3)(1 - u^2)/u. Used as a fallback when the 2x2 system is
// ill-conditioned near the double root.
double solve_matching_in_u(int n, int d, double u0) {
  const double target = 2.0 / static_cast<double>(d);
  double u = u0;
  for (int it = 0; it < 100; ++it) {
    const double m = static_cast<double>(n - 3);
    const double f = 2.0 * u - m * (1.0 - u * u) / u - target;
    const double fp = 2.0 + m * (1.0 / (u * u) + 1.0);
    const double step = f / fp;
    u -= step;
    if (std::abs(step) < 1e-15 * u) break;
  }
  return u;
}

}  // namespace

ConeAngleSolution solve_cone_angle(int n, int d) {
  require_dim(n);
  if (d < 1) throw std::domain_error("branch degree d must be >= 1");
  const auto [a_max, v] = a_max_and_v(n);

  double a = 0.0, u = 1.0;
  // Continuation: walk the strictly increasing sequence a(1) < a(2) < ... so
  // each Newton solve starts inside its basin. Degrees advance geometrically
  // to keep the walk short for very large d.
  std::vector<int> degrees;
  for (int k = 1; k < d; k *= 2) degrees.push_back(k);
  degrees.push_back(d);

  for (int deg : degrees) {
    const double target = 2.0 / static_cast<double>(deg);
    for (int it = 0; it < 100; ++it) {
      const ProfileEval e = eval_model_profile(n, a, u);
      const double f0 = e.V;
      const double f1 = e.Vp - target;
      if (std::abs(f0) < 1e-14 && std::abs(f1) < 1e-14) break;
      const double m = static_cast<double>(3 - n);
      const double w = std::pow(u, m);
      // Jacobian of (V, V') in (a, u)
      const double j00 = w, j01 = e.Vp;
      const double j10 = m * w / u, j11 = e.Vpp;
      const double det = j00 * j11 - j01 * j10;
      const double frob = j00 * j00 + j01 * j01 + j10 * j10 + j11 * j11;
      if (std::abs(det) * 1e12 < frob) {
        // Degenerate near the double root: solve for u along the root locus.
        u = solve_matching_in_u(n, deg, u);
        a = (1.0 - u * u) * std::pow(u, n - 3);
        break;
      }
      const double da = (f0 * j11 - f1 * j01) / det;
      const double du = (j00 * f1 - j10 * f0) / det;
      a -= da;
      u -= du;
      if (!(u > 0.0) || !std::isfinite(a) || !std::isfinite(u))
        throw SolverError("cone-angle Newton left the domain", a, u);
      if (std::abs(da) < 1e-15 * std::max(1.0, std::abs(a)) && std::abs(du) < 1e-15 * u) break;
    }
  }

  ConeAngleSolution sol;
  sol.d = d;
  sol.a_of_d = a;
  sol.u_of_d = u;
  const ProfileEval e = eval_model_profile(n, a, u);
  sol.residuals = {std::abs(e.V), std::abs(e.Vp - 2.0 / static_cast<double>(d))};
  if (sol.residuals[0] > 1e-10 || sol.residuals[1] > 1e-10)
    throw SolverError("cone-angle matching did not converge", a, u);
  if (a > a_max || u < v * (1.0 - 1e-12))
    throw SolverError("cone-angle solution left the admissible family", a, u);
  return sol;
}

ProfileSpec ProfileSpec::hyperbolic(int n) {
  require_dim(n);
  return ProfileSpec(Kind::Hyperbolic, n, 0.0, 1.0, gluing::CutoffSpec());
}

ProfileSpec ProfileSpec::model(int n, double a) {
  const double lo = (a == 0.0) ? 1.0 : largest_root(n, a);
  return ProfileSpec(Kind::Model, n, a, lo, gluing::CutoffSpec());
}

ProfileSpec ProfileSpec::glued(int n, double a, const gluing::CutoffSpec& cutoff) {
  const double lo = (a == 0.0) ? 1.0 : largest_root(n, a);
  return ProfileSpec(Kind::Glued, n, a, lo, cutoff);
}

ProfileEval ProfileSpec::eval(double u) const {
  switch (kind_) {
    case Kind::Hyperbolic:
      return {u * u - 1.0, 2.0 * u, 2.0};
    case Kind::Model:
      return eval_model_profile(n_, a_, u);
    case Kind::Glued: {
      if (!(u > 0.0)) throw std::domain_error("glued profile requires u > 0");
      // Exact on both sides of the transition band: chi is exactly 1 below
      // and exactly 0 above, so this branch reproduces the model and
      // hyperbolic evaluations bit-for-bit there.
      double c, c1, c2;
      cutoff_.chi_jet(u, c, c1, c2);
      if (c == 1.0 && c1 == 0.0 && c2 == 0.0) return eval_model_profile(n_, a_, u);
      if (c == 0.0 && c1 == 0.0 && c2 == 0.0) return {u * u - 1.0, 2.0 * u, 2.0};
      const DeviationEval dev = deviation(u);
      return {u * u - 1.0 + dev.D, 2.0 * u + dev.Dp, 2.0 + dev.Dpp};
    }
  }
  throw std::logic_error("unreachable profile kind");
}

DeviationEval ProfileSpec::deviation(double u) const {
  if (kind_ == Kind::Hyperbolic || a_ == 0.0) return {0.0, 0.0, 0.0};
  if (!(u > 0.0)) throw std::domain_error("profile deviation requires u > 0");
  const double m = static_cast<double>(3 - n_);
  const double w = std::pow(u, m);
  const double w1 = m * w / u;
  const double w2 = m * (m - 1.0) * w / (u * u);
  if (kind_ == Kind::Model) return {a_ * w, a_ * w1, a_ * w2};
  double c, c1, c2;
  cutoff_.chi_jet(u, c, c1, c2);
  if (c == 1.0 && c1 == 0.0 && c2 == 0.0) return {a_ * w, a_ * w1, a_ * w2};
  if (c == 0.0 && c1 == 0.0 && c2 == 0.0) return {0.0, 0.0, 0.0};
  return {a_ * (w * c), a_ * (w1 * c + w * c1), a_ * (w2 * c + 2.0 * w1 * c1 + w * c2)};
}

}  // namespace einglue::profiles
